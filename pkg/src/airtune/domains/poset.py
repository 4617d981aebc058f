"""Abstract-domain identifiers and the precision partial order.

The order is a DAG over domain ids: an edge ``lower < upper`` means the upper
domain is at least as precise.  Two ids are comparable iff one reaches the
other.  Ids may be declared but unimplemented; they participate in the order
but are rejected by any analysis request.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum


class DomainId(Enum):
    BOOL = "bool"
    INTERVALS = "intervals"
    RIC = "ric"
    DISINT = "disInt"
    ZONES = "zones"
    OCTAGONS = "octagons"
    PROD_BOOL_ZONES = "prod(bool,zones)"
    POLYHEDRA = "polyhedra"
    TERM_INT = "term(int)"
    TERM_DISINT = "term(disInt)"
    BOXES = "boxes"

    @property
    def token(self) -> str:
        return self.value


# Order used for deterministic choice lists, enumeration, and recipe output.
CANONICAL_ORDER: tuple[DomainId, ...] = (
    DomainId.BOOL, DomainId.INTERVALS, DomainId.RIC, DomainId.DISINT,
    DomainId.ZONES, DomainId.OCTAGONS, DomainId.PROD_BOOL_ZONES,
    DomainId.POLYHEDRA, DomainId.TERM_INT, DomainId.TERM_DISINT,
    DomainId.BOXES,
)
_CANON_INDEX = {d: i for i, d in enumerate(CANONICAL_ORDER)}

IMPLEMENTED: frozenset[DomainId] = frozenset({
    DomainId.BOOL, DomainId.INTERVALS, DomainId.RIC, DomainId.DISINT,
    DomainId.ZONES, DomainId.OCTAGONS, DomainId.PROD_BOOL_ZONES,
})

_TOKEN_TO_ID = {d.token: d for d in DomainId}


class PosetError(ValueError):
    pass


class UnknownDomainError(PosetError):
    pass


def domain_from_token(token: str) -> DomainId:
    try:
        return _TOKEN_TO_ID[token]
    except KeyError:
        raise UnknownDomainError(f"unknown domain {token!r}") from None


def _sorted_canonical(ids) -> tuple[DomainId, ...]:
    return tuple(sorted(ids, key=_CANON_INDEX.__getitem__))


@dataclass(frozen=True)
class DomainPoset:
    nodes: tuple[DomainId, ...]
    edges: frozenset[tuple[DomainId, DomainId]]  # (lower, upper)
    implemented: frozenset[DomainId]
    _reach: dict  # node -> frozenset of nodes reachable upward (reflexive)

    @staticmethod
    def build(nodes, edges, implemented) -> "DomainPoset":
        nodes = _sorted_canonical(set(nodes))
        node_set = set(nodes)
        for lo, hi in edges:
            if lo not in node_set or hi not in node_set:
                raise PosetError(f"edge {lo.token} < {hi.token} uses undeclared domain")
        succs: dict[DomainId, list[DomainId]] = {n: [] for n in nodes}
        for lo, hi in edges:
            succs[lo].append(hi)
        reach: dict[DomainId, frozenset[DomainId]] = {}

        def visit(n: DomainId, trail: tuple) -> frozenset:
            if n in trail:
                raise PosetError(f"cycle through {n.token} in domain poset")
            if n in reach:
                return reach[n]
            acc = {n}
            for s in succs[n]:
                acc |= visit(s, trail + (n,))
            reach[n] = frozenset(acc)
            return reach[n]

        for n in nodes:
            visit(n, ())
        bad = set(implemented) - IMPLEMENTED
        if bad:
            names = ", ".join(d.token for d in _sorted_canonical(bad))
            raise PosetError(f"cannot mark as implemented: {names}")
        return DomainPoset(nodes=nodes, edges=frozenset(edges),
                           implemented=frozenset(implemented), _reach=reach)

    def __contains__(self, d: DomainId) -> bool:
        return d in self._reach

    def require(self, d: DomainId) -> None:
        if d not in self._reach:
            raise UnknownDomainError(f"domain {d.token!r} not in poset")

    def leq(self, d1: DomainId, d2: DomainId) -> bool:
        """d1 is at most as precise as d2 (reflexive)."""
        self.require(d1)
        self.require(d2)
        return d2 in self._reach[d1]

    def comparable(self, d1: DomainId, d2: DomainId) -> bool:
        return self.leq(d1, d2) or self.leq(d2, d1)

    def implemented_ids(self) -> tuple[DomainId, ...]:
        return _sorted_canonical(self.implemented)

    def covers(self) -> frozenset[tuple[DomainId, DomainId]]:
        """The cover relation of the order (edges with no node in between)."""
        out = set()
        for a in self.nodes:
            for b in self.nodes:
                if a is b or b not in self._reach[a]:
                    continue
                between = any(c is not a and c is not b
                              and c in self._reach[a] and b in self._reach[c]
                              for c in self.nodes)
                if not between:
                    out.add((a, b))
        return frozenset(out)

    def immediate_successors(self, d: DomainId, *, implemented_only=True):
        self.require(d)
        out = [b for a, b in self.covers() if a is d]
        if implemented_only:
            out = [b for b in out if b in self.implemented]
        return _sorted_canonical(out)

    def immediate_predecessors(self, d: DomainId, *, implemented_only=True):
        self.require(d)
        out = [a for a, b in self.covers() if b is d]
        if implemented_only:
            out = [a for a in out if a in self.implemented]
        return _sorted_canonical(out)

    def minimal_of(self, subset) -> tuple[DomainId, ...]:
        """Minimal elements of the order restricted to the given ids."""
        subset = list(subset)
        return _sorted_canonical(
            d for d in subset
            if not any(o is not d and self.leq(o, d) for o in subset))

    def maximal_implemented(self) -> tuple[DomainId, ...]:
        impl = self.implemented_ids()
        return _sorted_canonical(
            d for d in impl
            if not any(o is not d and self.leq(d, o) for o in impl))

    def restrict(self, allowed) -> "DomainPoset":
        """Induced subposet on the given ids (cover edges recomputed)."""
        allowed = set(allowed)
        for d in allowed:
            self.require(d)
        edges = {(a, b) for a in allowed for b in allowed
                 if a is not b and self.leq(a, b)}
        sub = DomainPoset.build(allowed, edges, self.implemented & allowed)
        # Rebuild with cover edges only, for clean immediate successor sets.
        return DomainPoset.build(allowed, sub.covers(), self.implemented & allowed)


_DEFAULT_POSET_TEXT = """\
domain bool
domain intervals
domain ric
domain disInt
domain zones
domain octagons
domain prod(bool,zones)
domain polyhedra unimplemented
domain term(int) unimplemented
domain term(disInt) unimplemented
domain boxes unimplemented
intervals < ric
intervals < disInt
intervals < zones
intervals < term(int)
zones < octagons
octagons < polyhedra
disInt < term(disInt)
disInt < boxes
bool < prod(bool,zones)
zones < prod(bool,zones)
"""


def parse_poset(text: str) -> DomainPoset:
    """Parse a poset description: ``domain <id> [unimplemented]`` lines plus
    ``lower < upper`` edge lines."""
    nodes: list[DomainId] = []
    implemented: set[DomainId] = set()
    edges: set[tuple[DomainId, DomainId]] = set()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("domain "):
            rest = line[len("domain "):].split()
            if not rest or len(rest) > 2 or (len(rest) == 2 and rest[1] != "unimplemented"):
                raise PosetError(f"line {lineno}: malformed domain declaration")
            d = domain_from_token(rest[0])
            if d in nodes:
                raise PosetError(f"line {lineno}: duplicate domain {d.token!r}")
            nodes.append(d)
            if len(rest) == 1:
                implemented.add(d)
        elif "<" in line:
            lo_t, _, hi_t = line.partition("<")
            lo = domain_from_token(lo_t.strip())
            hi = domain_from_token(hi_t.strip())
            edges.add((lo, hi))
        else:
            raise PosetError(f"line {lineno}: cannot parse {line!r}")
    return DomainPoset.build(nodes, edges, implemented)


def default_poset() -> DomainPoset:
    return parse_poset(_DEFAULT_POSET_TEXT)
