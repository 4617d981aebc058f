"""Reduced product of the flat boolean domain and zones.

The reduction is deliberately shallow: a bottom component makes the whole
product bottom, and comparisons assigned to boolean variables are remembered
as guards so that assuming the variable (or its negation) replays the
comparison into the zones component.  In the other direction, a comparison
the zones component already entails fixes the assigned boolean immediately.

A guard entry (b -> cmp) is part of the concretization: stores must give b
exactly the truth value of cmp.  Guards are dropped whenever b or any
variable of cmp is reassigned, and joins keep only guards present on both
sides, which keeps every recorded guard valid by construction.
"""

from __future__ import annotations

from ..ir.nodes import (Alloc, ArrLoad, ArrStore, Assign, BinOp, BoolAssign,
                        Cmp, Free, Havoc, LinExpr, cell_var, eval_cond,
                        negate, status_var)
from .base import BOTTOM, AbstractDomain
from .boxes import B_FALSE, B_TRUE, BoolDomain
from .dbm import ZonesDomain
from .poset import DomainId


class ProdState:
    __slots__ = ("bools", "zones", "guards")

    def __init__(self, bools, zones, guards: dict):
        self.bools = bools
        self.zones = zones
        self.guards = guards

    def __eq__(self, other):
        return (isinstance(other, ProdState) and self.bools == other.bools
                and self.zones == other.zones and self.guards == other.guards)

    def __repr__(self):
        return f"ProdState({self.bools!r}, {self.zones!r}, guards={self.guards})"


class ProdBoolZonesDomain(AbstractDomain):
    domain_id = DomainId.PROD_BOOL_ZONES
    tracks_bools = True

    def __init__(self):
        self.bool_dom = BoolDomain()
        self.zone_dom = ZonesDomain()

    def make_top(self, num_vars, bool_vars):
        return ProdState(self.bool_dom.make_top((), bool_vars),
                         self.zone_dom.make_top(num_vars, ()), {})

    def _reduce(self, bools, zones, guards):
        if bools is BOTTOM or zones is BOTTOM:
            return BOTTOM
        return ProdState(bools, zones, guards)

    # -- lattice -------------------------------------------------------------

    def leq(self, a, b):
        if a is BOTTOM:
            return True
        if b is BOTTOM:
            return False
        if not all(v in a.guards and a.guards[v] == c for v, c in b.guards.items()):
            return False
        return (self.bool_dom.leq(a.bools, b.bools)
                and self.zone_dom.leq(a.zones, b.zones))

    def _common_guards(self, a, b):
        return {v: c for v, c in a.guards.items() if b.guards.get(v) == c}

    def join(self, a, b):
        if a is BOTTOM:
            return b
        if b is BOTTOM:
            return a
        return self._reduce(self.bool_dom.join(a.bools, b.bools),
                            self.zone_dom.join(a.zones, b.zones),
                            self._common_guards(a, b))

    def meet(self, a, b):
        if a is BOTTOM or b is BOTTOM:
            return BOTTOM
        guards = dict(b.guards)
        guards.update(a.guards)
        return self._reduce(self.bool_dom.meet(a.bools, b.bools),
                            self.zone_dom.meet(a.zones, b.zones), guards)

    def widen(self, a, b, thresholds):
        if a is BOTTOM:
            return b
        if b is BOTTOM:
            return a
        return self._reduce(self.bool_dom.widen(a.bools, b.bools, thresholds),
                            self.zone_dom.widen(a.zones, b.zones, thresholds),
                            self._common_guards(a, b))

    def narrow(self, a, b):
        if a is BOTTOM or b is BOTTOM:
            return BOTTOM
        return self._reduce(self.bool_dom.narrow(a.bools, b.bools),
                            self.zone_dom.narrow(a.zones, b.zones),
                            dict(a.guards))

    # -- statements ----------------------------------------------------------

    def _drop_guards(self, guards: dict, var: str) -> dict:
        if not guards:
            return guards
        out = {b: c for b, c in guards.items()
               if b != var and var not in c.lhs.variables()
               and var not in c.rhs.variables()}
        return out

    def transfer(self, s, stmt, smashing: bool = True):
        if s is BOTTOM:
            return BOTTOM
        kind = type(stmt)
        if kind is BoolAssign:
            bools = self.bool_dom.transfer_boolassign(s.bools, stmt)
            guards = self._drop_guards(s.guards, stmt.var)
            expr = stmt.expr
            if (isinstance(expr, Cmp) and isinstance(expr.lhs, LinExpr)
                    and isinstance(expr.rhs, LinExpr)):
                guards = dict(guards)
                guards[stmt.var] = expr
                if bools is not BOTTOM:
                    if self.zone_dom.entails(s.zones, expr):
                        bools = self.bool_dom.assume_boolref(bools, stmt.var, True)
                    elif self.zone_dom.entails(s.zones, negate(expr)):
                        bools = self.bool_dom.assume_boolref(bools, stmt.var, False)
            return self._reduce(bools, s.zones, guards)
        if kind in (Assign, BinOp, Havoc, ArrLoad):
            zones = self.zone_dom.transfer(s.zones, stmt, smashing)
            return self._reduce(s.bools, zones, self._drop_guards(s.guards, stmt.var))
        if kind is ArrStore:
            zones = self.zone_dom.transfer(s.zones, stmt, smashing)
            return self._reduce(s.bools, zones,
                                self._drop_guards(s.guards, cell_var(stmt.array)))
        if kind in (Alloc, Free):
            zones = self.zone_dom.transfer(s.zones, stmt, smashing)
            return self._reduce(s.bools, zones,
                                self._drop_guards(s.guards, status_var(stmt.handle)))
        # Assume / Assert / Deref
        return super().transfer(s, stmt, smashing)

    def assume_boolref(self, s, name, value):
        bools = self.bool_dom.assume_boolref(s.bools, name, value)
        if bools is BOTTOM:
            return BOTTOM
        zones = s.zones
        guard = s.guards.get(name)
        if guard is not None:
            zones = self.zone_dom.assume(zones, guard if value else negate(guard))
        return self._reduce(bools, zones, s.guards)

    def assume_cmp(self, s, cmp):
        return self._reduce(s.bools, self.zone_dom.assume_cmp(s.zones, cmp),
                            s.guards)

    # -- introspection and backward -------------------------------------------

    def bounds(self, s, var):
        if s is BOTTOM:
            return self.zone_dom.bounds(BOTTOM, var)
        return self.zone_dom.bounds(s.zones, var)

    def eval_lin_bounds(self, s, expr):
        return self.zone_dom.eval_lin_bounds(s.zones, expr)

    def project(self, s, var):
        if s is BOTTOM:
            return BOTTOM
        guards = self._drop_guards(s.guards, var)
        if var in s.bools.store:
            return self._reduce(self.bool_dom.project(s.bools, var), s.zones, guards)
        return self._reduce(s.bools, self.zone_dom.project(s.zones, var), guards)

    def backward(self, post, stmt, smashing: bool = True):
        if post is BOTTOM:
            return BOTTOM
        kind = type(stmt)
        if kind is BoolAssign:
            return self.project(post, stmt.var)
        if kind in (Assign, BinOp, Havoc, ArrLoad, ArrStore, Alloc, Free):
            zones = self.zone_dom.backward(post.zones, stmt, smashing)
            if zones is BOTTOM:
                return BOTTOM
            written = (cell_var(stmt.array) if kind is ArrStore else
                       status_var(stmt.handle) if kind in (Alloc, Free) else stmt.var)
            return self._reduce(post.bools, zones,
                                self._drop_guards(post.guards, written))
        return super().backward(post, stmt, smashing)

    def contains_point(self, s, env):
        if s is BOTTOM:
            return False
        if not (self.bool_dom.contains_point(s.bools, env)
                and self.zone_dom.contains_point(s.zones, env)):
            return False
        return all(bool(env[b]) == eval_cond(c, env) for b, c in s.guards.items())
