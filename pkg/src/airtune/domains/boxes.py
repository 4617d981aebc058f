"""Non-relational domains: intervals, bounded disjunctive intervals, the
interval-with-congruence reduced product, and the flat boolean domain.

All four share one store shape: an immutable dict from variable to a
domain-specific payload, over a fixed variable tuple.
"""

from __future__ import annotations

from math import gcd

from ..ir.nodes import (BoolAssign, BoolLit, BoolRef, Cmp, LinExpr, NotE,
                        AndE, OrE, lin_const)
from .base import (BOTTOM, INF, NEG_INF, AbstractDomain, RefinementMixin,
                   check_same_vars, iv_add, iv_binop, iv_scale, widen_hi,
                   widen_lo)
from .poset import DomainId


class BoxState:
    __slots__ = ("vars", "store")

    def __init__(self, vars: tuple, store: dict):
        self.vars = vars
        self.store = store

    def __eq__(self, other):
        return (isinstance(other, BoxState) and self.vars == other.vars
                and self.store == other.store)

    def __hash__(self):
        return hash((self.vars, tuple(sorted(self.store.items()))))

    def __repr__(self):
        inner = ", ".join(f"{v}: {p}" for v, p in self.store.items())
        return f"{{{inner}}}"

    def with_entry(self, var, payload):
        store = dict(self.store)
        store[var] = payload
        return BoxState(self.vars, store)


class _BoxDomain(RefinementMixin, AbstractDomain):
    """Common plumbing for per-variable payload stores."""

    def make_top(self, num_vars, bool_vars):
        return BoxState(num_vars, {v: self.top_payload() for v in num_vars})

    def top_payload(self):
        raise NotImplementedError

    def leq(self, a, b):
        if a is BOTTOM:
            return True
        if b is BOTTOM:
            return False
        check_same_vars(a, b)
        return all(self.payload_leq(a.store[v], b.store[v]) for v in a.vars)

    def _merge(self, a, b, combine):
        check_same_vars(a, b)
        store = {}
        for v in a.vars:
            p = combine(a.store[v], b.store[v])
            if p is None:
                return BOTTOM
            store[v] = p
        return BoxState(a.vars, store)

    def join(self, a, b):
        if a is BOTTOM:
            return b
        if b is BOTTOM:
            return a
        return self._merge(a, b, self.payload_join)

    def meet(self, a, b):
        if a is BOTTOM or b is BOTTOM:
            return BOTTOM
        return self._merge(a, b, self.payload_meet)

    def widen(self, a, b, thresholds):
        if a is BOTTOM:
            return b
        if b is BOTTOM:
            return a
        return self._merge(a, b, lambda x, y: self.payload_widen(x, y, thresholds))

    def narrow(self, a, b):
        if b is BOTTOM:
            return BOTTOM
        if a is BOTTOM:
            return BOTTOM
        return self._merge(a, b, self.payload_narrow)

    def project(self, s, var):
        if s is BOTTOM:
            return BOTTOM
        return s.with_entry(var, self.top_payload())

    def contains_point(self, s, env):
        if s is BOTTOM:
            return False
        return all(self.payload_contains(s.store[v], env[v]) for v in s.vars)

    # payload hooks -----------------------------------------------------------

    def payload_leq(self, p, q) -> bool:
        raise NotImplementedError

    def payload_join(self, p, q):
        raise NotImplementedError

    def payload_meet(self, p, q):
        """None signals an empty meet (state normalizes to BOTTOM)."""
        raise NotImplementedError

    def payload_widen(self, p, q, thresholds):
        raise NotImplementedError

    def payload_narrow(self, p, q):
        raise NotImplementedError

    def payload_contains(self, p, value) -> bool:
        raise NotImplementedError


# ---------------------------------------------------------------------------
# Intervals
# ---------------------------------------------------------------------------

class IntervalDomain(_BoxDomain):
    domain_id = DomainId.INTERVALS

    def top_payload(self):
        return (NEG_INF, INF)

    def payload_leq(self, p, q):
        return p[0] >= q[0] and p[1] <= q[1]

    def payload_join(self, p, q):
        return (min(p[0], q[0]), max(p[1], q[1]))

    def payload_meet(self, p, q):
        lo, hi = max(p[0], q[0]), min(p[1], q[1])
        return None if lo > hi else (lo, hi)

    def payload_widen(self, p, q, thresholds):
        return (widen_lo(p[0], q[0], thresholds), widen_hi(p[1], q[1], thresholds))

    def payload_narrow(self, p, q):
        lo = q[0] if p[0] == NEG_INF else p[0]
        hi = q[1] if p[1] == INF else p[1]
        return (lo, hi)

    def payload_contains(self, p, value):
        return p[0] <= value <= p[1]

    def bounds(self, s, var):
        if s is BOTTOM:
            return (INF, NEG_INF)
        return s.store.get(var, (NEG_INF, INF))

    def assign_linexpr(self, s, var, expr):
        if s is BOTTOM:
            return BOTTOM
        return s.with_entry(var, self.eval_lin_bounds(s, expr))

    def assign_interval(self, s, var, lo, hi):
        if s is BOTTOM:
            return BOTTOM
        return s.with_entry(var, (lo, hi))

    def refine_le(self, s, var, hi):
        lo, old_hi = s.store[var]
        if hi >= old_hi:
            return s
        if lo > hi:
            return BOTTOM
        return s.with_entry(var, (lo, hi))

    def refine_ge(self, s, var, lo):
        old_lo, hi = s.store[var]
        if lo <= old_lo:
            return s
        if lo > hi:
            return BOTTOM
        return s.with_entry(var, (lo, hi))

    def remove_point(self, s, var, value):
        lo, hi = s.store[var]
        if lo == hi == value:
            return BOTTOM
        if lo == value:
            return s.with_entry(var, (lo + 1, hi))
        if hi == value:
            return s.with_entry(var, (lo, hi - 1))
        return s


# ---------------------------------------------------------------------------
# Disjunctive intervals (at most K pairwise non-adjacent intervals per var)
# ---------------------------------------------------------------------------

def _normalize_disjuncts(parts, cap):
    """Sort, merge overlapping/adjacent parts, then enforce the cap by merging
    the consecutive pair with the smallest gap (leftmost on ties)."""
    parts = sorted(p for p in parts if p[0] <= p[1])
    if not parts:
        return None
    merged = [parts[0]]
    for lo, hi in parts[1:]:
        plo, phi = merged[-1]
        if lo <= phi + 1:
            merged[-1] = (plo, max(phi, hi))
        else:
            merged.append((lo, hi))
    while len(merged) > cap:
        best_i = 0
        best_gap = None
        for i in range(len(merged) - 1):
            gap = merged[i + 1][0] - merged[i][1]
            if best_gap is None or gap < best_gap:
                best_gap = gap
                best_i = i
        merged[best_i:best_i + 2] = [(merged[best_i][0], merged[best_i + 1][1])]
    return tuple(merged)


class DisIntDomain(_BoxDomain):
    domain_id = DomainId.DISINT

    def __init__(self, cap: int = 4):
        self.cap = cap

    def top_payload(self):
        return ((NEG_INF, INF),)

    def payload_leq(self, p, q):
        # Disjuncts are non-adjacent, so each p part must fit inside one q part.
        for lo, hi in p:
            if not any(qlo <= lo and hi <= qhi for qlo, qhi in q):
                return False
        return True

    def payload_join(self, p, q):
        return _normalize_disjuncts(list(p) + list(q), self.cap)

    def _intersect_pieces(self, p, q):
        pieces = []
        for alo, ahi in p:
            for blo, bhi in q:
                lo, hi = max(alo, blo), min(ahi, bhi)
                if lo <= hi:
                    pieces.append((lo, hi))
        return pieces

    def payload_meet(self, p, q):
        # Over the cap, keep the widest pieces: the result stays a lattice
        # lower bound of both arguments (merging would leave the gap).
        pieces = self._intersect_pieces(p, q)
        if not pieces:
            return None
        if len(pieces) > self.cap:
            def width(piece):
                return piece[1] - piece[0]
            pieces = sorted(pieces, key=lambda piece: (-width(piece), piece[0]))[:self.cap]
        return tuple(sorted(pieces))

    def meet_over(self, a, b):
        if a is BOTTOM or b is BOTTOM:
            return BOTTOM

        def combine(p, q):
            pieces = self._intersect_pieces(p, q)
            return _normalize_disjuncts(pieces, self.cap) if pieces else None

        return self._merge(a, b, combine)

    def payload_widen(self, p, q, thresholds):
        if self.payload_leq(q, p):
            return p
        plo, phi = p[0][0], p[-1][1]
        qlo, qhi = q[0][0], q[-1][1]
        return ((widen_lo(plo, qlo, thresholds), widen_hi(phi, qhi, thresholds)),)

    def payload_narrow(self, p, q):
        out = []
        for lo, hi in p:
            if lo != NEG_INF and hi != INF:
                out.append((lo, hi))
                continue
            inside = [item for item in q if lo <= item[0] and item[1] <= hi]
            if not inside:
                continue
            out.append((inside[0][0] if lo == NEG_INF else lo,
                        inside[-1][1] if hi == INF else hi))
        return _normalize_disjuncts(out, self.cap) if out else None

    def payload_contains(self, p, value):
        return any(lo <= value <= hi for lo, hi in p)

    def bounds(self, s, var):
        if s is BOTTOM:
            return (INF, NEG_INF)
        p = s.store.get(var)
        if p is None:
            return (NEG_INF, INF)
        return (p[0][0], p[-1][1])

    def _eval_lin_disjuncts(self, s, expr):
        acc = [(expr.const, expr.const)]
        for v, c in expr.terms:
            parts = s.store[v]
            acc = _normalize_disjuncts(
                [iv_add(a, iv_scale(p, c)) for a in acc for p in parts], self.cap)
        return tuple(acc)

    def assign_linexpr(self, s, var, expr):
        if s is BOTTOM:
            return BOTTOM
        return s.with_entry(var, self._eval_lin_disjuncts(s, expr))

    def assign_interval(self, s, var, lo, hi):
        if s is BOTTOM:
            return BOTTOM
        return s.with_entry(var, ((lo, hi),))

    def _transfer_binop(self, s, stmt):
        if stmt.op in ("+", "-") or (stmt.op == "*" and
                                     (stmt.lhs.is_const() or stmt.rhs.is_const())):
            return super()._transfer_binop(s, stmt)
        lhs = self._eval_lin_disjuncts(s, stmt.lhs)
        rhs = self._eval_lin_disjuncts(s, stmt.rhs)
        pieces = []
        for a in lhs:
            for b in rhs:
                r = iv_binop(stmt.op, a, b)
                if r is not None:
                    pieces.append(r)
        if not pieces:
            return BOTTOM
        return s.with_entry(stmt.var, _normalize_disjuncts(pieces, self.cap))

    def refine_le(self, s, var, hi):
        parts = [(lo, min(phi, hi)) for lo, phi in s.store[var] if lo <= hi]
        if not parts:
            return BOTTOM
        return s.with_entry(var, tuple(parts))

    def refine_ge(self, s, var, lo):
        parts = [(max(plo, lo), hi) for plo, hi in s.store[var] if hi >= lo]
        if not parts:
            return BOTTOM
        return s.with_entry(var, tuple(parts))

    def remove_point(self, s, var, value):
        out = []
        for lo, hi in s.store[var]:
            if lo <= value <= hi:
                if lo == hi:
                    continue
                if lo == value:
                    out.append((lo + 1, hi))
                elif hi == value:
                    out.append((lo, hi - 1))
                else:
                    out.append((lo, value - 1))
                    out.append((value + 1, hi))
            else:
                out.append((lo, hi))
        if not out:
            return BOTTOM
        return s.with_entry(var, _normalize_disjuncts(out, self.cap))


# ---------------------------------------------------------------------------
# ric: reduced product of intervals and congruence classes a*Z + b
# ---------------------------------------------------------------------------

CONG_TOP = (1, 0)


def cong_const(c):
    return (0, c)


def cong_join(c1, c2):
    a1, b1 = c1
    a2, b2 = c2
    a = gcd(gcd(a1, a2), abs(b1 - b2))
    return (a, b1 % a) if a else (0, b1)


def cong_meet(c1, c2):
    """Intersection of two classes, or None when disjoint (CRT)."""
    a1, b1 = c1
    a2, b2 = c2
    if a1 == 0 and a2 == 0:
        return (0, b1) if b1 == b2 else None
    if a1 == 0:
        return (0, b1) if (b1 - b2) % a2 == 0 else None
    if a2 == 0:
        return (0, b2) if (b2 - b1) % a1 == 0 else None
    g = gcd(a1, a2)
    if (b1 - b2) % g != 0:
        return None
    lcm = a1 // g * a2
    # Solve x = b1 (mod a1), x = b2 (mod a2) via the extended gcd.
    _, p, _ = _egcd(a1, a2)
    diff = (b2 - b1) // g
    x = (b1 + a1 * diff * p) % lcm
    return (lcm, x)


def _egcd(a, b):
    if b == 0:
        return (a, 1, 0)
    g, x, y = _egcd(b, a % b)
    return (g, y, x - (a // b) * y)


def cong_leq(c1, c2):
    a1, b1 = c1
    a2, b2 = c2
    if a2 == 0:
        return a1 == 0 and b1 == b2
    return a1 % a2 == 0 and (b1 - b2) % a2 == 0


def cong_add(c1, c2):
    a1, b1 = c1
    a2, b2 = c2
    a = gcd(a1, a2)
    return (a, (b1 + b2) % a) if a else (0, b1 + b2)


def cong_scale(c, k):
    a, b = c
    if k == 0:
        return (0, 0)
    a2 = a * abs(k)
    return (a2, (b * k) % a2) if a2 else (0, b * k)


def cong_contains(c, value):
    a, b = c
    return value == b if a == 0 else (value - b) % a == 0


def _snap_up(lo, cong):
    """Smallest member of the class >= lo."""
    a, b = cong
    if lo == NEG_INF:
        return lo
    if a == 0:
        return b
    return lo + (b - lo) % a


def _snap_down(hi, cong):
    a, b = cong
    if hi == INF:
        return hi
    if a == 0:
        return b
    return hi - (hi - b) % a


def reduce_ric_payload(p):
    """Mutually refine interval and congruence; None when empty."""
    (lo, hi), cong = p
    a, b = cong
    if a == 0:
        if lo <= b <= hi:
            return ((b, b), (0, b))
        return None
    lo2 = _snap_up(lo, cong)
    hi2 = _snap_down(hi, cong)
    if lo2 > hi2:
        return None
    if lo2 == hi2:
        return ((lo2, lo2), (0, lo2))
    return ((lo2, hi2), cong)


class RicDomain(_BoxDomain):
    domain_id = DomainId.RIC

    def top_payload(self):
        return ((NEG_INF, INF), CONG_TOP)

    def payload_leq(self, p, q):
        return (p[0][0] >= q[0][0] and p[0][1] <= q[0][1]
                and cong_leq(p[1], q[1]))

    def payload_join(self, p, q):
        iv = (min(p[0][0], q[0][0]), max(p[0][1], q[0][1]))
        return reduce_ric_payload((iv, cong_join(p[1], q[1])))

    def payload_meet(self, p, q):
        lo, hi = max(p[0][0], q[0][0]), min(p[0][1], q[0][1])
        if lo > hi:
            return None
        cong = cong_meet(p[1], q[1])
        if cong is None:
            return None
        return reduce_ric_payload(((lo, hi), cong))

    def payload_widen(self, p, q, thresholds):
        iv = (widen_lo(p[0][0], q[0][0], thresholds),
              widen_hi(p[0][1], q[0][1], thresholds))
        cong = p[1] if cong_leq(q[1], p[1]) else CONG_TOP
        reduced = reduce_ric_payload((iv, cong))
        return reduced if reduced is not None else (iv, CONG_TOP)

    def payload_narrow(self, p, q):
        lo = q[0][0] if p[0][0] == NEG_INF else p[0][0]
        hi = q[0][1] if p[0][1] == INF else p[0][1]
        reduced = reduce_ric_payload(((lo, hi), p[1]))
        return reduced

    def payload_contains(self, p, value):
        (lo, hi), cong = p
        return lo <= value <= hi and cong_contains(cong, value)

    def bounds(self, s, var):
        if s is BOTTOM:
            return (INF, NEG_INF)
        p = s.store.get(var)
        if p is None:
            return (NEG_INF, INF)
        return p[0]

    def assign_linexpr(self, s, var, expr):
        if s is BOTTOM:
            return BOTTOM
        iv = self.eval_lin_bounds(s, expr)
        cong = cong_const(expr.const)
        for v, c in expr.terms:
            cong = cong_add(cong, cong_scale(s.store[v][1], c))
        p = reduce_ric_payload((iv, cong))
        return BOTTOM if p is None else s.with_entry(var, p)

    def assign_interval(self, s, var, lo, hi):
        if s is BOTTOM:
            return BOTTOM
        p = reduce_ric_payload(((lo, hi), CONG_TOP))
        return BOTTOM if p is None else s.with_entry(var, p)

    def _refine_iv(self, s, var, lo, hi):
        (plo, phi), cong = s.store[var]
        lo, hi = max(plo, lo), min(phi, hi)
        if lo > hi:
            return BOTTOM
        p = reduce_ric_payload(((lo, hi), cong))
        return BOTTOM if p is None else s.with_entry(var, p)

    def refine_le(self, s, var, hi):
        return self._refine_iv(s, var, NEG_INF, hi)

    def refine_ge(self, s, var, lo):
        return self._refine_iv(s, var, lo, INF)

    def remove_point(self, s, var, value):
        (lo, hi), cong = s.store[var]
        if not (lo <= value <= hi and cong_contains(cong, value)):
            return s
        if lo == hi == value:
            return BOTTOM
        if lo == value:
            return self._refine_iv(s, var, lo + 1, hi)
        if hi == value:
            return self._refine_iv(s, var, lo, hi - 1)
        return s

    def assume_cmp(self, s, cmp):
        # Equality against a constant also refines the congruence class.
        s = super().assume_cmp(s, cmp)
        if s is BOTTOM or cmp.op != "==":
            return s
        lhs, rhs = cmp.lhs, cmp.rhs
        if not (isinstance(lhs, LinExpr) and isinstance(rhs, LinExpr)):
            return s
        diff = lhs.sub(rhs)
        if len(diff.terms) != 1:
            return s
        var, coef = diff.terms[0]
        if abs(coef) != 1 or var not in s.store:
            return s
        value = -diff.const * coef
        iv, cong = s.store[var]
        met = cong_meet(cong, cong_const(value))
        if met is None:
            return BOTTOM
        p = reduce_ric_payload((iv, met))
        return BOTTOM if p is None else s.with_entry(var, p)


# ---------------------------------------------------------------------------
# Flat booleans (three-valued per variable, encoded as 2-bit masks)
# ---------------------------------------------------------------------------

B_BOT, B_FALSE, B_TRUE, B_TOP = 0, 1, 2, 3


def _tv_not(m):
    return ((m & 1) << 1) | (m >> 1)


def _tv_and(x, y):
    true_bit = (x & y) & 2
    false_bit = (x | y) & 1
    return true_bit | false_bit


def _tv_or(x, y):
    true_bit = (x | y) & 2
    false_bit = (x & y) & 1
    return true_bit | false_bit


class BoolDomain(AbstractDomain):
    """Tracks boolean variables only; numeric statements act as the identity."""

    domain_id = DomainId.BOOL
    tracks_bools = True

    def make_top(self, num_vars, bool_vars):
        return BoxState(bool_vars, {v: B_TOP for v in bool_vars})

    def leq(self, a, b):
        if a is BOTTOM:
            return True
        if b is BOTTOM:
            return False
        check_same_vars(a, b)
        return all(a.store[v] & ~b.store[v] == 0 for v in a.vars)

    def _merge(self, a, b, op):
        check_same_vars(a, b)
        store = {}
        for v in a.vars:
            m = op(a.store[v], b.store[v])
            if m == B_BOT:
                return BOTTOM
            store[v] = m
        return BoxState(a.vars, store)

    def join(self, a, b):
        if a is BOTTOM:
            return b
        if b is BOTTOM:
            return a
        return self._merge(a, b, lambda x, y: x | y)

    def meet(self, a, b):
        if a is BOTTOM or b is BOTTOM:
            return BOTTOM
        return self._merge(a, b, lambda x, y: x & y)

    def widen(self, a, b, thresholds):
        return self.join(a, b)

    def narrow(self, a, b):
        if a is BOTTOM or b is BOTTOM:
            return BOTTOM
        # Refine only unknowns, mirroring interval narrowing of infinities.
        return self._merge(a, b, lambda x, y: y if x == B_TOP else x)

    def tv_eval(self, s, cond):
        t = type(cond)
        if t is BoolLit:
            return B_TRUE if cond.value else B_FALSE
        if t is BoolRef:
            return s.store.get(cond.name, B_TOP)
        if t is NotE:
            return _tv_not(self.tv_eval(s, cond.arg))
        if t is AndE:
            m = B_TRUE
            for item in cond.args:
                m = _tv_and(m, self.tv_eval(s, item))
            return m
        if t is OrE:
            m = B_FALSE
            for item in cond.args:
                m = _tv_or(m, self.tv_eval(s, item))
            return m
        return B_TOP  # numeric comparison: unknown to the boolean store

    def transfer_boolassign(self, s, stmt: BoolAssign):
        return s.with_entry(stmt.var, self.tv_eval(s, stmt.expr))

    def assume_boolref(self, s, name, value):
        want = B_TRUE if value else B_FALSE
        m = s.store[name] & want
        if m == B_BOT:
            return BOTTOM
        return s.with_entry(name, m)

    def assume_cmp(self, s, cmp):
        return s

    def assign_linexpr(self, s, var, expr):
        return s

    def assign_interval(self, s, var, lo, hi):
        return s

    def project(self, s, var):
        if s is BOTTOM:
            return BOTTOM
        if var in s.store:
            return s.with_entry(var, B_TOP)
        return s

    def backward_boolassign(self, post, stmt):
        return self.project(post, stmt.var)

    def contains_point(self, s, env):
        if s is BOTTOM:
            return False
        for v in s.vars:
            mask = B_TRUE if env[v] else B_FALSE
            if s.store[v] & mask == 0:
                return False
        return True
