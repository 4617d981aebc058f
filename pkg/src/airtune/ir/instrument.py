"""Insertion of runtime-error assertions in front of risky operations.

One assertion per risky operator occurrence: every ``/`` or ``%`` gets a
nonzero-divisor check, every binop whose mathematical result could leave the
signed bit-width range gets a range check (constant-folded operations that
provably stay in range are skipped), every array access gets a bounds check,
and every deref gets an allocation-status check.  Fresh ids continue from the
largest id already present.
"""

from __future__ import annotations

from .nodes import (AndE, ArrLoad, ArrStore, Assert, AssertKind, BinExpr,
                    BinOp, Block, Cmp, Deref, Function, LinExpr, Program,
                    Stmt, len_var, lin_const, lin_var, status_var, tdiv, tmod)


def _overflow_result_expr(stmt: BinOp) -> LinExpr | BinExpr:
    """The operation's value as a condition-level expression."""
    if stmt.op == "+":
        return stmt.lhs.add(stmt.rhs)
    if stmt.op == "-":
        return stmt.lhs.sub(stmt.rhs)
    if stmt.op == "*":
        if stmt.rhs.is_const():
            return stmt.lhs.scale(stmt.rhs.const)
        if stmt.lhs.is_const():
            return stmt.rhs.scale(stmt.lhs.const)
    return BinExpr(stmt.lhs, stmt.op, stmt.rhs)


def _const_result_in_range(stmt: BinOp, lo: int, hi: int) -> bool:
    if not (stmt.lhs.is_const() and stmt.rhs.is_const()):
        return False
    a, b = stmt.lhs.const, stmt.rhs.const
    if stmt.op in ("/", "%"):
        if b == 0:
            return False
        value = tdiv(a, b) if stmt.op == "/" else tmod(a, b)
    elif stmt.op == "+":
        value = a + b
    elif stmt.op == "-":
        value = a - b
    else:
        value = a * b
    return lo <= value <= hi


def instrument(program: Program, kinds: set[AssertKind],
               bit_width: int = 32) -> Program:
    """Return a copy of the program with guard assertions inserted."""
    if bit_width < 2:
        raise ValueError("bit_width must be >= 2")
    lo = -(1 << (bit_width - 1))
    hi = (1 << (bit_width - 1)) - 1
    existing = program.assertion_ids()
    next_id = max(existing, default=0) + 1

    def fresh() -> int:
        nonlocal next_id
        aid = next_id
        next_id += 1
        return aid

    def guards_for(stmt: Stmt) -> list[Assert]:
        out: list[Assert] = []
        if isinstance(stmt, BinOp):
            if stmt.op in ("/", "%") and AssertKind.DIV_ZERO in kinds:
                out.append(Assert(AssertKind.DIV_ZERO,
                                  Cmp(stmt.rhs, "!=", lin_const(0)), fresh()))
            if (AssertKind.INT_OVERFLOW in kinds
                    and not _const_result_in_range(stmt, lo, hi)):
                res = _overflow_result_expr(stmt)
                cond = AndE((Cmp(lin_const(lo), "<=", res),
                             Cmp(res, "<=", lin_const(hi))))
                out.append(Assert(AssertKind.INT_OVERFLOW, cond, fresh()))
        elif isinstance(stmt, (ArrStore, ArrLoad)):
            if AssertKind.BUF_OVERFLOW in kinds:
                cond = AndE((Cmp(lin_const(0), "<=", stmt.index),
                             Cmp(stmt.index, "<", lin_var(len_var(stmt.array)))))
                out.append(Assert(AssertKind.BUF_OVERFLOW, cond, fresh()))
        elif isinstance(stmt, Deref):
            if AssertKind.USE_AFTER_FREE in kinds:
                cond = Cmp(lin_var(status_var(stmt.handle)), "==", lin_const(1))
                out.append(Assert(AssertKind.USE_AFTER_FREE, cond, fresh()))
        return out

    functions = []
    for fn in program.functions:
        blocks = {}
        for block in fn.blocks.values():
            stmts: list[Stmt] = []
            for stmt in block.stmts:
                stmts.extend(guards_for(stmt))
                stmts.append(stmt)
            blocks[block.bid] = Block(block.bid, tuple(stmts), block.term)
        functions.append(Function(
            name=fn.name, params=fn.params, blocks=blocks, entry=fn.entry,
            var_types=dict(fn.var_types), arrays=fn.arrays, handles=fn.handles))
    return Program(tuple(functions))


def count_risky(program: Program, kinds: set[AssertKind],
                bit_width: int = 32) -> int:
    """Number of guards one instrumentation pass would insert."""
    lo = -(1 << (bit_width - 1))
    hi = (1 << (bit_width - 1)) - 1
    count = 0
    for fn in program.functions:
        for block in fn.blocks.values():
            for stmt in block.stmts:
                if isinstance(stmt, BinOp):
                    if stmt.op in ("/", "%") and AssertKind.DIV_ZERO in kinds:
                        count += 1
                    if (AssertKind.INT_OVERFLOW in kinds
                            and not _const_result_in_range(stmt, lo, hi)):
                        count += 1
                elif isinstance(stmt, (ArrStore, ArrLoad)):
                    if AssertKind.BUF_OVERFLOW in kinds:
                        count += 1
                elif isinstance(stmt, Deref):
                    if AssertKind.USE_AFTER_FREE in kinds:
                        count += 1
    return count
