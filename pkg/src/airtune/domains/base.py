"""Shared machinery for the abstract domains.

States are immutable values; ``BOTTOM`` is a single shared sentinel meaning
the empty concretization.  Bounds are ints or ``±inf`` floats.  Each domain
implements a small set of hooks (variable bounds, linear assignment, bound
refinement); the generic code in this module provides statement transfer,
condition decomposition, entailment, and backward transfer on top of them.
"""

from __future__ import annotations

import bisect
from typing import Iterable

from ..ir.nodes import (Alloc, AndE, ArrLoad, ArrStore, Assert, Assign,
                        Assume, BinExpr, BinOp, BoolAssign, BoolLit, BoolRef,
                        Cmp, Cond, Deref, Free, Havoc, LinExpr, NotE, OrE,
                        Stmt, cell_var, lin, lin_const, lin_var, negate,
                        status_var, tdiv, tmod)

INF = float("inf")
NEG_INF = float("-inf")


class _Bottom:
    __slots__ = ()

    def __repr__(self):
        return "BOTTOM"


BOTTOM = _Bottom()


class VarSetMismatchError(ValueError):
    pass


def check_same_vars(a, b) -> None:
    if a.vars is not b.vars and a.vars != b.vars:
        raise VarSetMismatchError(
            f"operands range over different variables: {a.vars} vs {b.vars}")


# ---------------------------------------------------------------------------
# Interval arithmetic over ints extended with +-inf
# ---------------------------------------------------------------------------

def _mul_bound(x, y):
    if x == 0 or y == 0:
        return 0
    return x * y


def iv_add(a, b):
    return (a[0] + b[0], a[1] + b[1])


def iv_neg(a):
    return (-a[1], -a[0])


def iv_sub(a, b):
    return (a[0] - b[1], a[1] - b[0])


def iv_scale(a, k: int):
    if k == 0:
        return (0, 0)
    if k > 0:
        return (_mul_bound(a[0], k), _mul_bound(a[1], k))
    return (_mul_bound(a[1], k), _mul_bound(a[0], k))


def iv_mul(a, b):
    corners = (_mul_bound(a[0], b[0]), _mul_bound(a[0], b[1]),
               _mul_bound(a[1], b[0]), _mul_bound(a[1], b[1]))
    return (min(corners), max(corners))


def _tdiv_bound(a, b):
    if a in (INF, NEG_INF):
        return a if b > 0 else -a
    if b in (INF, NEG_INF):
        return 0
    return tdiv(a, b)


def iv_div(a, b):
    """Bounds of truncated division; divisor range restricted to nonzero.

    Returns None when the divisor can only be zero (no defined result).
    """
    parts = []
    if b[0] <= -1:
        parts.append((b[0], min(b[1], -1)))
    if b[1] >= 1:
        parts.append((max(b[0], 1), b[1]))
    if not parts:
        return None
    candidates = []
    for lo_d, hi_d in parts:
        for x in (a[0], a[1]):
            for y in (lo_d, hi_d):
                candidates.append(_tdiv_bound(x, y))
    return (min(candidates), max(candidates))


def iv_mod(a, b):
    """Bounds of truncated remainder (sign follows the dividend)."""
    if a[0] == a[1] and b[0] == b[1]:
        if b[0] == 0:
            return None
        v = tmod(a[0], b[0])
        return (v, v)
    m = max(abs(b[0]), abs(b[1]))
    if m == 0:
        return None
    hi = m - 1 if m != INF else INF
    lo = -hi if hi != INF else NEG_INF
    if a[0] >= 0:
        lo = 0
    if a[1] <= 0:
        hi = 0
    return (lo, hi)


def iv_binop(op: str, a, b):
    if op == "+":
        return iv_add(a, b)
    if op == "-":
        return iv_sub(a, b)
    if op == "*":
        return iv_mul(a, b)
    if op == "/":
        return iv_div(a, b)
    return iv_mod(a, b)


def widen_hi(old, new, thresholds):
    if new <= old:
        return old
    if new != INF:
        i = bisect.bisect_left(thresholds, new)
        if i < len(thresholds):
            return thresholds[i]
    return INF


def widen_lo(old, new, thresholds):
    if new >= old:
        return old
    if new != NEG_INF:
        i = bisect.bisect_right(thresholds, new)
        if i > 0:
            return thresholds[i - 1]
    return NEG_INF


def ceil_div(a: int, b: int) -> int:
    return -((-a) // b)


# ---------------------------------------------------------------------------
# Domain base classes
# ---------------------------------------------------------------------------

class AbstractDomain:
    """Interface shared by all domains; subclasses fill in the hooks."""

    domain_id = None
    tracks_bools = False

    # -- construction --------------------------------------------------------

    def make_top(self, num_vars: tuple[str, ...], bool_vars: tuple[str, ...]):
        raise NotImplementedError

    # -- lattice -------------------------------------------------------------

    def is_bottom(self, s) -> bool:
        return s is BOTTOM

    def leq(self, a, b) -> bool:
        raise NotImplementedError

    def join(self, a, b):
        raise NotImplementedError

    def meet(self, a, b):
        raise NotImplementedError

    def meet_over(self, a, b):
        """Over-approximation of the concretization intersection.

        Identical to meet except where a representation cap forces meet to
        under-approximate to stay a lattice lower bound (disInt); engine code
        that needs intersection soundness uses this variant.
        """
        return self.meet(a, b)

    def widen(self, a, b, thresholds: list[int]):
        raise NotImplementedError

    def narrow(self, a, b):
        raise NotImplementedError

    def equal(self, a, b) -> bool:
        return (a is BOTTOM and b is BOTTOM) or \
            (a is not BOTTOM and b is not BOTTOM and self.leq(a, b) and self.leq(b, a))

    # -- conditions ----------------------------------------------------------

    def assume(self, s, cond: Cond):
        if s is BOTTOM:
            return BOTTOM
        t = type(cond)
        if t is BoolLit:
            return s if cond.value else BOTTOM
        if t is BoolRef:
            return self.assume_boolref(s, cond.name, True)
        if t is NotE:
            inner = cond.arg
            if type(inner) is BoolRef:
                return self.assume_boolref(s, inner.name, False)
            return self.assume(s, negate(inner))
        if t is AndE:
            for item in cond.args:
                s = self.assume(s, item)
                if s is BOTTOM:
                    return BOTTOM
            return s
        if t is OrE:
            acc = BOTTOM
            for item in cond.args:
                branch = self.assume(s, item)
                acc = branch if acc is BOTTOM else (
                    acc if branch is BOTTOM else self.join(acc, branch))
            return acc
        return self.assume_cmp(s, cond)

    def assume_boolref(self, s, name: str, value: bool):
        return s  # numeric domains carry no boolean information

    def assume_cmp(self, s, cmp: Cmp):
        raise NotImplementedError

    def entails(self, s, cond: Cond) -> bool:
        return self.assume(s, negate(cond)) is BOTTOM

    # -- introspection -------------------------------------------------------

    def bounds(self, s, var: str):
        """(lo, hi) over-approximation of var, or (-inf, inf) if untracked."""
        return (NEG_INF, INF)

    def project(self, s, var: str):
        raise NotImplementedError

    def contains_point(self, s, env: dict) -> bool:
        raise NotImplementedError

    # -- statements ----------------------------------------------------------

    def transfer(self, s, stmt: Stmt, smashing: bool = True):
        if s is BOTTOM:
            return BOTTOM
        kind = type(stmt)
        if kind is Assign:
            return self.assign_linexpr(s, stmt.var, stmt.expr)
        if kind is BinOp:
            return self._transfer_binop(s, stmt)
        if kind is Havoc:
            lo = NEG_INF if stmt.lo is None else stmt.lo
            hi = INF if stmt.hi is None else stmt.hi
            return self.assign_interval(s, stmt.var, lo, hi)
        if kind is Assume:
            return self.assume(s, stmt.cond)
        if kind is Assert:
            return s
        if kind is BoolAssign:
            return self.transfer_boolassign(s, stmt)
        if kind is ArrStore:
            if not smashing:
                return s
            updated = self.assign_linexpr(s, cell_var(stmt.array), stmt.value)
            return self.join(s, updated)  # weak update of the summary cell
        if kind is ArrLoad:
            if not smashing:
                return self.assign_interval(s, stmt.var, NEG_INF, INF)
            lo, hi = self.bounds(s, cell_var(stmt.array))
            return self.assign_interval(s, stmt.var, lo, hi)
        if kind is Alloc:
            return self.assign_linexpr(s, status_var(stmt.handle), lin_const(1))
        if kind is Free:
            return self.assign_linexpr(s, status_var(stmt.handle), lin_const(0))
        if kind is Deref:
            return s
        raise TypeError(f"unknown statement {stmt!r}")

    def transfer_boolassign(self, s, stmt: BoolAssign):
        return s

    def _transfer_binop(self, s, stmt: BinOp):
        if stmt.op == "+":
            return self.assign_linexpr(s, stmt.var, stmt.lhs.add(stmt.rhs))
        if stmt.op == "-":
            return self.assign_linexpr(s, stmt.var, stmt.lhs.sub(stmt.rhs))
        if stmt.op == "*":
            if stmt.rhs.is_const():
                return self.assign_linexpr(s, stmt.var, stmt.lhs.scale(stmt.rhs.const))
            if stmt.lhs.is_const():
                return self.assign_linexpr(s, stmt.var, stmt.rhs.scale(stmt.lhs.const))
        result = iv_binop(stmt.op, self.eval_lin_bounds(s, stmt.lhs),
                          self.eval_lin_bounds(s, stmt.rhs))
        if result is None:  # division by a provably-zero divisor: no successor
            return BOTTOM
        return self.assign_interval(s, stmt.var, result[0], result[1])

    # -- assignment hooks ----------------------------------------------------

    def assign_linexpr(self, s, var: str, expr: LinExpr):
        raise NotImplementedError

    def assign_interval(self, s, var: str, lo, hi):
        raise NotImplementedError

    def eval_lin_bounds(self, s, expr: LinExpr):
        acc = (expr.const, expr.const)
        for v, c in expr.terms:
            acc = iv_add(acc, iv_scale(self.bounds(s, v), c))
        return acc

    def eval_arith_bounds(self, s, expr):
        if isinstance(expr, LinExpr):
            return self.eval_lin_bounds(s, expr)
        assert isinstance(expr, BinExpr)
        return iv_binop(expr.op, self.eval_lin_bounds(s, expr.lhs),
                        self.eval_lin_bounds(s, expr.rhs))

    # -- backward ------------------------------------------------------------

    def backward(self, post, stmt: Stmt, smashing: bool = True):
        """Necessary precondition: over-approximates every store whose
        successor under stmt lies in the post-state."""
        if post is BOTTOM:
            return BOTTOM
        kind = type(stmt)
        if kind is Assign:
            return self._backward_assign(post, stmt.var, stmt.expr)
        if kind is BinOp:
            if stmt.op == "+":
                return self._backward_assign(post, stmt.var, stmt.lhs.add(stmt.rhs))
            if stmt.op == "-":
                return self._backward_assign(post, stmt.var, stmt.lhs.sub(stmt.rhs))
            if stmt.op == "*" and stmt.rhs.is_const():
                return self._backward_assign(post, stmt.var, stmt.lhs.scale(stmt.rhs.const))
            if stmt.op == "*" and stmt.lhs.is_const():
                return self._backward_assign(post, stmt.var, stmt.rhs.scale(stmt.lhs.const))
            return self.project(post, stmt.var)
        if kind is Havoc:
            lo = NEG_INF if stmt.lo is None else stmt.lo
            hi = INF if stmt.hi is None else stmt.hi
            s = self._meet_var_range(post, stmt.var, lo, hi)
            return BOTTOM if s is BOTTOM else self.project(s, stmt.var)
        if kind is Assume:
            return self.assume(post, stmt.cond)
        if kind is Assert:
            return post
        if kind is BoolAssign:
            return self.backward_boolassign(post, stmt)
        if kind is ArrStore:
            return self.project(post, cell_var(stmt.array)) if smashing else post
        if kind is ArrLoad:
            return self.project(post, stmt.var)
        if kind is Alloc:
            return self._backward_const_def(post, status_var(stmt.handle), 1)
        if kind is Free:
            return self._backward_const_def(post, status_var(stmt.handle), 0)
        if kind is Deref:
            return post
        raise TypeError(f"unknown statement {stmt!r}")

    def backward_boolassign(self, post, stmt: BoolAssign):
        return post

    def _backward_assign(self, post, var: str, expr: LinExpr):
        lo, hi = self.bounds(post, var)
        s = self.project(post, var)
        if s is BOTTOM:
            return BOTTOM
        if hi != INF:
            s = self.assume_cmp(s, Cmp(expr, "<=", lin_const(int(hi))))
            if s is BOTTOM:
                return BOTTOM
        if lo != NEG_INF:
            s = self.assume_cmp(s, Cmp(lin_const(int(lo)), "<=", expr))
        return s

    def _backward_const_def(self, post, var: str, value: int):
        s = self._meet_var_range(post, var, value, value)
        return BOTTOM if s is BOTTOM else self.project(s, var)

    def _meet_var_range(self, s, var: str, lo, hi):
        v = lin_var(var)
        if hi != INF:
            s = self.assume_cmp(s, Cmp(v, "<=", lin_const(int(hi))))
            if s is BOTTOM:
                return BOTTOM
        if lo != NEG_INF:
            s = self.assume_cmp(s, Cmp(lin_const(int(lo)), "<=", v))
        return s


class RefinementMixin:
    """Generic condition handling for domains exposing per-variable bound
    refinement (refine_le / refine_ge / remove_point hooks)."""

    def assume_cmp(self, s, cmp: Cmp):
        lhs, op, rhs = cmp.lhs, cmp.op, cmp.rhs
        if op == ">":
            return self._assume_lt(s, rhs, lhs)
        if op == ">=":
            return self._assume_le(s, rhs, lhs)
        if op == "<":
            return self._assume_lt(s, lhs, rhs)
        if op == "<=":
            return self._assume_le(s, lhs, rhs)
        if op == "==":
            s = self._assume_le(s, lhs, rhs)
            if s is BOTTOM:
                return BOTTOM
            return self._assume_le(s, rhs, lhs)
        return self._assume_ne(s, lhs, rhs)

    def _assume_lt(self, s, a, b):
        # a < b over integers is a + 1 <= b
        if isinstance(a, LinExpr):
            return self._assume_le(s, a.add(lin_const(1)), b)
        if isinstance(b, LinExpr):
            return self._assume_le(s, a, b.add(lin_const(-1)))
        alo, _ = self.eval_arith_bounds(s, a)
        _, bhi = self.eval_arith_bounds(s, b)
        return BOTTOM if alo >= bhi else s

    def _assume_le(self, s, a, b):
        if isinstance(a, LinExpr) and isinstance(b, LinExpr):
            return self.assume_diff_le_zero(s, a.sub(b))
        abounds = self.eval_arith_bounds(s, a)
        bbounds = self.eval_arith_bounds(s, b)
        if abounds is None or bbounds is None:
            return BOTTOM
        if abounds[0] > bbounds[1]:
            return BOTTOM
        if isinstance(b, LinExpr) and abounds[0] != NEG_INF:
            s = self.assume_diff_le_zero(s, lin_const(int(abounds[0])).sub(b))
            if s is BOTTOM:
                return BOTTOM
        if isinstance(a, LinExpr) and bbounds[1] != INF:
            s = self.assume_diff_le_zero(s, a.sub(lin_const(int(bbounds[1]))))
        return s

    def _assume_ne(self, s, a, b):
        if isinstance(a, LinExpr) and isinstance(b, LinExpr):
            diff = a.sub(b)
            dlo, dhi = self.eval_lin_bounds(s, diff)
            if dlo == dhi == 0:
                return BOTTOM
            if dlo > 0 or dhi < 0:
                return s
            if len(diff.terms) == 1 and abs(diff.terms[0][1]) == 1:
                var, coef = diff.terms[0]
                excluded = -diff.const * coef  # value of var making diff zero
                return self.remove_point(s, var, excluded)
            return s
        ab = self.eval_arith_bounds(s, a)
        bb = self.eval_arith_bounds(s, b)
        if ab is None or bb is None:
            return BOTTOM
        if ab[0] == ab[1] == bb[0] == bb[1]:
            return BOTTOM
        return s

    def assume_diff_le_zero(self, s, diff: LinExpr):
        """Assume sum(ci*vi) + c0 <= 0 by refining each variable in turn."""
        if not diff.terms:
            return s if diff.const <= 0 else BOTTOM
        total = self.eval_lin_bounds(s, diff)
        if total[0] > 0:
            return BOTTOM
        for var, coef in diff.terms:
            rest_lo = diff.const
            for v2, c2 in diff.terms:
                if v2 == var:
                    continue
                lo2, hi2 = self.bounds(s, v2)
                rest_lo += c2 * lo2 if c2 > 0 else c2 * hi2
            if rest_lo == NEG_INF:
                continue
            # coef*var <= -rest_lo
            if coef > 0:
                bound = -rest_lo
                s = self.refine_le(s, var, bound // coef if bound != INF else INF)
            else:
                bound = -rest_lo
                s = self.refine_ge(s, var,
                                   ceil_div(bound, coef) if bound != INF else NEG_INF)
            if s is BOTTOM:
                return BOTTOM
        return s

    def refine_le(self, s, var: str, hi):
        raise NotImplementedError

    def refine_ge(self, s, var: str, lo):
        raise NotImplementedError

    def remove_point(self, s, var: str, value: int):
        return s
