"""Functional facade over the domain implementations.

``get_domain`` returns the (stateless) implementation object for an id; the
free functions mirror the operation surface used by the fixpoint engine and
the tests and add the argument checking the engine itself relies on.
"""

from __future__ import annotations

from .base import BOTTOM, AbstractDomain
from .boxes import BoolDomain, DisIntDomain, IntervalDomain, RicDomain, BoxState
from .dbm import OctagonDomain, ZonesDomain
from .poset import DomainId, DomainPoset, UnknownDomainError
from .product import ProdBoolZonesDomain, ProdState
from . import boxes as _boxes


class UnimplementedDomainError(UnknownDomainError):
    pass


_REGISTRY: dict[DomainId, AbstractDomain] = {
    DomainId.BOOL: BoolDomain(),
    DomainId.INTERVALS: IntervalDomain(),
    DomainId.RIC: RicDomain(),
    DomainId.DISINT: DisIntDomain(),
    DomainId.ZONES: ZonesDomain(),
    DomainId.OCTAGONS: OctagonDomain(),
    DomainId.PROD_BOOL_ZONES: ProdBoolZonesDomain(),
}


def get_domain(d: DomainId) -> AbstractDomain:
    impl = _REGISTRY.get(d)
    if impl is None:
        raise UnimplementedDomainError(
            f"domain {d.token!r} is declared but unimplemented")
    return impl


def leq(d: DomainId, a, b) -> bool:
    return get_domain(d).leq(a, b)


def join(d: DomainId, a, b):
    return get_domain(d).join(a, b)


def meet(d: DomainId, a, b):
    return get_domain(d).meet(a, b)


def widen(d: DomainId, a, b, thresholds=()):
    return get_domain(d).widen(a, b, list(thresholds))


def narrow(d: DomainId, a, b):
    impl = get_domain(d)
    if not impl.leq(b, a):
        raise ValueError("narrow requires the second state below the first")
    return impl.narrow(a, b)


def transfer(d: DomainId, s, stmt, smashing: bool = True):
    return get_domain(d).transfer(s, stmt, smashing)


def backward_transfer(d: DomainId, post, stmt, smashing: bool = True):
    return get_domain(d).backward(post, stmt, smashing)


def comparable(poset: DomainPoset, d1: DomainId, d2: DomainId) -> bool:
    return poset.comparable(d1, d2)


def reduce_state(d: DomainId, s):
    """Re-run the mutual refinement of a product-shaped state."""
    if s is BOTTOM:
        return BOTTOM
    if d is DomainId.RIC:
        store = {}
        for v, payload in s.store.items():
            p = _boxes.reduce_ric_payload(payload)
            if p is None:
                return BOTTOM
            store[v] = p
        return BoxState(s.vars, store)
    if d is DomainId.PROD_BOOL_ZONES:
        if s.bools is BOTTOM or s.zones is BOTTOM:
            return BOTTOM
        return s
    raise ValueError(f"reduce is defined for ric and prod states, not {d.token}")
