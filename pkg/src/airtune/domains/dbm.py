"""Difference-bound-matrix domains: zones and integer octagons.

Zones use a (n+1)-square matrix over the variables plus a zero row/column;
entry m[i][j] bounds x_i - x_j from above.  Octagons use the standard doubled
encoding: variable i owns rows 2i (+x_i) and 2i+1 (-x_i), kept coherent
(m[a][b] == m[b^1][a^1]), with the integer tightening step applied after
closure so that closed matrices are canonical.

States produced by join/meet/transfer are closed; widening intentionally
returns an unclosed matrix (re-closing it would break termination), and
closure is re-established on copies whenever canonical entries are needed.
"""

from __future__ import annotations

from ..ir.nodes import Cmp, LinExpr, lin_const
from .base import (BOTTOM, INF, NEG_INF, AbstractDomain, RefinementMixin,
                   check_same_vars, ceil_div, iv_add, iv_scale, widen_hi)
from .poset import DomainId


class DbmState:
    __slots__ = ("vars", "m", "closed")

    def __init__(self, vars: tuple, m: list, closed: bool):
        self.vars = vars
        self.m = m
        self.closed = closed

    def copy(self):
        return DbmState(self.vars, [row[:] for row in self.m], self.closed)

    def __eq__(self, other):
        if not isinstance(other, DbmState) or self.vars != other.vars:
            return False
        return self.m == other.m and self.closed == other.closed

    def __repr__(self):
        return f"DbmState({self.vars}, closed={self.closed})"


def _floyd_warshall(m: list) -> bool:
    """In-place all-pairs shortest paths; False when a negative cycle exists."""
    n = len(m)
    rng = range(n)
    for k in rng:
        mk = m[k]
        for i in rng:
            mi = m[i]
            d = mi[k]
            if d == INF:
                continue
            for j in rng:
                alt = d + mk[j]
                if alt < mi[j]:
                    mi[j] = alt
    for i in rng:
        if m[i][i] < 0:
            return False
        m[i][i] = 0
    return True


def _incremental_close(m: list, a: int, b: int) -> bool:
    """Restore closure after entry (a, b) was tightened; False on emptiness."""
    n = len(m)
    c = m[a][b]
    rng = range(n)
    for i in rng:
        mi = m[i]
        d = mi[a]
        if d == INF:
            continue
        dc = d + c
        mb = m[b]
        for j in rng:
            alt = dc + mb[j]
            if alt < mi[j]:
                mi[j] = alt
    for i in rng:
        if m[i][i] < 0:
            return False
        m[i][i] = 0
    return True


class _DbmBase(RefinementMixin, AbstractDomain):
    def dim(self, nvars: int) -> int:
        raise NotImplementedError

    def _finish(self, s: DbmState):
        raise NotImplementedError  # domain-specific canonicalization; None = empty

    def make_top(self, num_vars, bool_vars):
        n = self.dim(len(num_vars))
        m = [[INF] * n for _ in range(n)]
        for i in range(n):
            m[i][i] = 0
        return DbmState(num_vars, m, True)

    def index(self, s: DbmState, var: str) -> int:
        raise NotImplementedError

    def closed_copy(self, s: DbmState) -> DbmState:
        if s.closed:
            return s
        c = s.copy()
        if self.close(c) is None:
            return None
        return c

    def close(self, s: DbmState):
        if not _floyd_warshall(s.m):
            return None
        if self._finish(s) is None:
            return None
        s.closed = True
        return s

    def leq(self, a, b):
        if a is BOTTOM:
            return True
        if b is BOTTOM:
            return False
        check_same_vars(a, b)
        ca = self.closed_copy(a)
        if ca is None:
            return True
        am, bm = ca.m, b.m
        for i in range(len(am)):
            ai, bi = am[i], bm[i]
            for j in range(len(am)):
                if ai[j] > bi[j]:
                    return False
        return True

    def join(self, a, b):
        if a is BOTTOM:
            return b
        if b is BOTTOM:
            return a
        check_same_vars(a, b)
        ca = self.closed_copy(a)
        cb = self.closed_copy(b)
        if ca is None:
            return cb if cb is not None else BOTTOM
        if cb is None:
            return ca
        m = [[x if x > y else y for x, y in zip(ra, rb)]
             for ra, rb in zip(ca.m, cb.m)]
        return DbmState(a.vars, m, True)  # pointwise max of closed is closed

    def meet(self, a, b):
        if a is BOTTOM or b is BOTTOM:
            return BOTTOM
        check_same_vars(a, b)
        m = [[x if x < y else y for x, y in zip(ra, rb)]
             for ra, rb in zip(a.m, b.m)]
        s = DbmState(a.vars, m, False)
        return BOTTOM if self.close(s) is None else s

    def widen(self, a, b, thresholds):
        if a is BOTTOM:
            return b
        if b is BOTTOM:
            return a
        check_same_vars(a, b)
        cb = self.closed_copy(b)
        if cb is None:
            return a
        m = []
        for ra, rb in zip(a.m, cb.m):
            row = []
            for x, y in zip(ra, rb):
                row.append(x if y <= x else widen_hi(x, y, thresholds))
            m.append(row)
        return DbmState(a.vars, m, False)

    def narrow(self, a, b):
        if a is BOTTOM or b is BOTTOM:
            return BOTTOM
        check_same_vars(a, b)
        cb = self.closed_copy(b)
        if cb is None:
            return BOTTOM
        m = [[y if x == INF else x for x, y in zip(ra, rb)]
             for ra, rb in zip(a.m, cb.m)]
        s = DbmState(a.vars, m, False)
        return BOTTOM if self.close(s) is None else s

    # -- constraint plumbing ---------------------------------------------------

    def _tighten(self, s: DbmState, updates) -> DbmState | None:
        """Apply (i, j, c) bound updates to a closed state; None on emptiness."""
        out = s.copy()
        for i, j, c in updates:
            if c < out.m[i][j]:
                out.m[i][j] = c
                if not _incremental_close(out.m, i, j):
                    return None
        if self._finish(out) is None:
            return None
        out.closed = True
        return out

    def _forget_index(self, m: list, i: int) -> None:
        n = len(m)
        for j in range(n):
            m[i][j] = INF
            m[j][i] = INF
        m[i][i] = 0


# ---------------------------------------------------------------------------
# Zones
# ---------------------------------------------------------------------------

class ZonesDomain(_DbmBase):
    domain_id = DomainId.ZONES

    def dim(self, nvars):
        return nvars + 1

    def index(self, s, var):
        return s.vars.index(var) + 1

    def _finish(self, s):
        return s  # plain shortest-path closure is canonical for zones

    def bounds(self, s, var):
        if s is BOTTOM:
            return (INF, NEG_INF)
        c = self.closed_copy(s)
        if c is None:
            return (INF, NEG_INF)
        i = self.index(c, var)
        return (-c.m[0][i], c.m[i][0])

    def eval_lin_bounds(self, s, expr):
        if s is BOTTOM:
            return (INF, NEG_INF)
        c = self.closed_copy(s)
        if c is None:
            return (INF, NEG_INF)
        # Unit-coefficient difference: read the relational entry directly.
        if (len(expr.terms) == 2 and expr.terms[0][1] * expr.terms[1][1] == -1):
            (v1, c1), (v2, _) = expr.terms
            pos, neg = (v1, v2) if c1 == 1 else (v2, v1)
            i, j = self.index(c, pos), self.index(c, neg)
            lo, hi = c.m[j][i], c.m[i][j]
            return iv_add((expr.const, expr.const),
                          (-lo if lo != INF else NEG_INF, hi))
        acc = (expr.const, expr.const)
        for v, k in expr.terms:
            i = self.index(c, v)
            lo, hi = c.m[0][i], c.m[i][0]
            acc = iv_add(acc, iv_scale((-lo if lo != INF else NEG_INF, hi), k))
        return acc

    def _var_range_updates(self, s, var, lo, hi):
        i = self.index(s, var)
        updates = []
        if hi != INF:
            updates.append((i, 0, int(hi)))
        if lo != NEG_INF:
            updates.append((0, i, -int(lo)))
        return updates

    def project(self, s, var):
        if s is BOTTOM:
            return BOTTOM
        c = self.closed_copy(s)
        if c is None:
            return BOTTOM
        out = c.copy()
        self._forget_index(out.m, self.index(out, var))
        return out

    def assign_interval(self, s, var, lo, hi):
        if s is BOTTOM:
            return BOTTOM
        if lo > hi:
            return BOTTOM
        c = self.closed_copy(s)
        if c is None:
            return BOTTOM
        out = c.copy()
        i = self.index(out, var)
        self._forget_index(out.m, i)
        result = self._tighten(out, self._var_range_updates(out, var, lo, hi))
        return BOTTOM if result is None else result

    def assign_linexpr(self, s, var, expr):
        if s is BOTTOM:
            return BOTTOM
        c = self.closed_copy(s)
        if c is None:
            return BOTTOM
        terms = expr.terms
        i = self.index(c, var)
        # x := x + k keeps all relations, shifted.
        if len(terms) == 1 and terms[0] == (var, 1):
            out = c.copy()
            k = expr.const
            mi = out.m[i]
            for j in range(len(out.m)):
                if j != i:
                    if mi[j] != INF:
                        mi[j] += k
                    if out.m[j][i] != INF:
                        out.m[j][i] -= k
            return out
        # x := y + k: exact difference constraint.
        if len(terms) == 1 and terms[0][1] == 1 and terms[0][0] != var:
            j = self.index(c, terms[0][0])
            out = c.copy()
            self._forget_index(out.m, i)
            result = self._tighten(out, [(i, j, expr.const), (j, i, -expr.const)])
            return BOTTOM if result is None else result
        lo, hi = self.eval_lin_bounds(c, expr)
        return self.assign_interval(c, var, lo, hi)

    def assume_diff_le_zero(self, s, diff):
        c = self.closed_copy(s)
        if c is None:
            return BOTTOM
        terms = diff.terms
        if not terms:
            return c if diff.const <= 0 else BOTTOM
        if len(terms) == 1 and abs(terms[0][1]) == 1:
            v, k = terms[0]
            i = self.index(c, v)
            if k == 1:  # v <= -const
                result = self._tighten(c, [(i, 0, -diff.const)])
            else:  # -v + const <= 0, i.e. v >= const: 0 - v <= -const
                result = self._tighten(c, [(0, i, -diff.const)])
            return BOTTOM if result is None else result
        if (len(terms) == 2 and terms[0][1] * terms[1][1] == -1):
            (v1, c1), (v2, _) = terms
            pos, neg = (v1, v2) if c1 == 1 else (v2, v1)
            i, j = self.index(c, pos), self.index(c, neg)
            result = self._tighten(c, [(i, j, -diff.const)])
            return BOTTOM if result is None else result
        # General linear: fall back to per-variable interval refinement.
        return super().assume_diff_le_zero(c, diff)

    def refine_le(self, s, var, hi):
        i = self.index(s, var)
        result = self._tighten(s, [(i, 0, int(hi))]) if hi != INF else s
        return BOTTOM if result is None else result

    def refine_ge(self, s, var, lo):
        i = self.index(s, var)
        result = self._tighten(s, [(0, i, -int(lo))]) if lo != NEG_INF else s
        return BOTTOM if result is None else result

    def remove_point(self, s, var, value):
        lo, hi = self.bounds(s, var)
        if lo == hi == value:
            return BOTTOM
        if hi == value:
            return self.refine_le(s, var, value - 1)
        if lo == value:
            return self.refine_ge(s, var, value + 1)
        return s

    def contains_point(self, s, env):
        if s is BOTTOM:
            return False
        vals = [0] + [env[v] for v in s.vars]
        m = s.m
        for i in range(len(m)):
            mi = m[i]
            vi = vals[i]
            for j in range(len(m)):
                if vi - vals[j] > mi[j]:
                    return False
        return True


# ---------------------------------------------------------------------------
# Octagons
# ---------------------------------------------------------------------------

def _half(x):
    return x if x == INF else x // 2


class OctagonDomain(_DbmBase):
    domain_id = DomainId.OCTAGONS

    def dim(self, nvars):
        return 2 * nvars

    def pos(self, s, var):
        return 2 * s.vars.index(var)

    def _finish(self, s):
        """Integer tightening: unary bounds are even-floored and propagated."""
        m = s.m
        n = len(m)
        for a in range(n):
            ua = m[a][a ^ 1]
            if ua != INF:
                m[a][a ^ 1] = 2 * (ua // 2)
        for a in range(n):
            for b in range(n):
                if a == b:
                    continue
                t = _half(m[a][a ^ 1]) + _half(m[b ^ 1][b])
                if t < m[a][b]:
                    m[a][b] = t
        for a in range(n):
            if m[a][a] < 0 or _half(m[a][a ^ 1]) + _half(m[a ^ 1][a]) < 0:
                return None
        return s

    def _coherent(self, updates):
        out = []
        for i, j, c in updates:
            out.append((i, j, c))
            if (j ^ 1, i ^ 1) != (i, j):
                out.append((j ^ 1, i ^ 1, c))
        return out

    def project(self, s, var):
        if s is BOTTOM:
            return BOTTOM
        c = self.closed_copy(s)
        if c is None:
            return BOTTOM
        out = c.copy()
        p = self.pos(out, var)
        self._forget_index(out.m, p)
        self._forget_index(out.m, p + 1)
        return out

    def bounds(self, s, var):
        if s is BOTTOM:
            return (INF, NEG_INF)
        c = self.closed_copy(s)
        if c is None:
            return (INF, NEG_INF)
        p = self.pos(c, var)
        hi = _half(c.m[p][p ^ 1])
        lo_neg = _half(c.m[p ^ 1][p])
        return (-lo_neg if lo_neg != INF else NEG_INF, hi)

    def eval_lin_bounds(self, s, expr):
        if not isinstance(s, DbmState):
            return super().eval_lin_bounds(s, expr)
        c = self.closed_copy(s)
        if c is None:
            return (INF, NEG_INF)
        if len(expr.terms) == 2 and abs(expr.terms[0][1]) == 1 \
                and abs(expr.terms[1][1]) == 1:
            (v1, k1), (v2, k2) = expr.terms
            a = self.pos(c, v1) + (0 if k1 == 1 else 1)
            b = self.pos(c, v2) + (1 if k2 == 1 else 0)
            hi = c.m[a][b]
            lo = c.m[a ^ 1][b ^ 1]
            return iv_add((expr.const, expr.const),
                          (-lo if lo != INF else NEG_INF, hi))
        acc = (expr.const, expr.const)
        for v, k in expr.terms:
            acc = iv_add(acc, iv_scale(self.bounds(c, v), k))
        return acc

    def _var_range_updates(self, s, var, lo, hi):
        p = self.pos(s, var)
        updates = []
        if hi != INF:
            updates.append((p, p ^ 1, 2 * int(hi)))
        if lo != NEG_INF:
            updates.append((p ^ 1, p, -2 * int(lo)))
        return updates

    def assign_interval(self, s, var, lo, hi):
        if s is BOTTOM:
            return BOTTOM
        if lo > hi:
            return BOTTOM
        c = self.closed_copy(s)
        if c is None:
            return BOTTOM
        out = c.copy()
        p = self.pos(out, var)
        self._forget_index(out.m, p)
        self._forget_index(out.m, p + 1)
        result = self._tighten(out, self._var_range_updates(out, var, lo, hi))
        return BOTTOM if result is None else result

    def assign_linexpr(self, s, var, expr):
        if s is BOTTOM:
            return BOTTOM
        c = self.closed_copy(s)
        if c is None:
            return BOTTOM
        terms = expr.terms
        p = self.pos(c, var)
        if len(terms) == 1 and terms[0][0] == var and abs(terms[0][1]) == 1:
            out = c.copy()
            k = expr.const
            if terms[0][1] == -1:  # x := -x + k: swap the two rows/columns
                for row in out.m:
                    row[p], row[p + 1] = row[p + 1], row[p]
                out.m[p], out.m[p + 1] = out.m[p + 1], out.m[p]
            n = len(out.m)
            for j in range(n):
                if j != p and j != p + 1:
                    for a, sign in ((p, 1), (p + 1, -1)):
                        if out.m[a][j] != INF:
                            out.m[a][j] += sign * k
                        if out.m[j][a] != INF:
                            out.m[j][a] -= sign * k
            if out.m[p][p + 1] != INF:
                out.m[p][p + 1] += 2 * k
            if out.m[p + 1][p] != INF:
                out.m[p + 1][p] -= 2 * k
            return out
        if len(terms) == 1 and abs(terms[0][1]) == 1 and terms[0][0] != var:
            w, k1 = terms[0]
            q = self.pos(c, w)
            out = c.copy()
            self._forget_index(out.m, p)
            self._forget_index(out.m, p + 1)
            k = expr.const
            if k1 == 1:  # x - w <= k and w - x <= -k
                updates = [(p, q, k), (q, p, -k)]
            else:  # x = -w + k: x + w <= k and -x - w <= -k
                updates = [(p, q ^ 1, k), (p ^ 1, q, -k)]
            result = self._tighten(out, self._coherent(updates))
            return BOTTOM if result is None else result
        lo, hi = self.eval_lin_bounds(c, expr)
        return self.assign_interval(c, var, lo, hi)

    def assume_diff_le_zero(self, s, diff):
        c = self.closed_copy(s)
        if c is None:
            return BOTTOM
        terms = diff.terms
        if not terms:
            return c if diff.const <= 0 else BOTTOM
        bound = -diff.const
        if len(terms) == 1 and abs(terms[0][1]) == 1:
            v, k = terms[0]
            p = self.pos(c, v)
            upd = (p, p ^ 1, 2 * bound) if k == 1 else (p ^ 1, p, 2 * bound)
            result = self._tighten(c, [upd])
            return BOTTOM if result is None else result
        if (len(terms) == 2 and abs(terms[0][1]) == 1 and abs(terms[1][1]) == 1):
            (v1, k1), (v2, k2) = terms
            a = self.pos(c, v1) + (0 if k1 == 1 else 1)
            b = self.pos(c, v2) + (1 if k2 == 1 else 0)
            result = self._tighten(c, self._coherent([(a, b, bound)]))
            return BOTTOM if result is None else result
        return super().assume_diff_le_zero(c, diff)

    def refine_le(self, s, var, hi):
        if hi == INF:
            return s
        p = self.pos(s, var)
        result = self._tighten(s, [(p, p ^ 1, 2 * int(hi))])
        return BOTTOM if result is None else result

    def refine_ge(self, s, var, lo):
        if lo == NEG_INF:
            return s
        p = self.pos(s, var)
        result = self._tighten(s, [(p ^ 1, p, -2 * int(lo))])
        return BOTTOM if result is None else result

    def remove_point(self, s, var, value):
        lo, hi = self.bounds(s, var)
        if lo == hi == value:
            return BOTTOM
        if hi == value:
            return self.refine_le(s, var, value - 1)
        if lo == value:
            return self.refine_ge(s, var, value + 1)
        return s

    def contains_point(self, s, env):
        if s is BOTTOM:
            return False
        vals = []
        for v in s.vars:
            vals.append(env[v])
            vals.append(-env[v])
        m = s.m
        for i in range(len(m)):
            mi = m[i]
            vi = vals[i]
            for j in range(len(m)):
                if vi - vals[j] > mi[j]:
                    return False
        return True
