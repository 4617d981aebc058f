"""Bounded exhaustive concrete execution, the soundness oracle.

Every havoc statement forks execution over its full value range, so the
explored paths cover the complete nondeterministic input cross product.
An assertion is reported as holding iff no explored path reaches it with a
false condition.  A division by zero or out-of-bounds access halts the
current path after any guard in front of it has already been evaluated;
a failed assume also halts the path (infeasible).  A condition whose own
evaluation divides by zero (an overflow guard wrapping a division) halts the
path without recording a violation: the division-by-zero guard inserted
before it owns that failure.
"""

from __future__ import annotations

from dataclasses import dataclass

from .nodes import (Alloc, ArrLoad, ArrStore, Assert, Assign, Assume, BinOp,
                    BoolAssign, Branch, Deref, Free, Function, Goto, Havoc,
                    Program, Return, eval_cond, len_var, status_var, tdiv,
                    tmod)


class ExecutionBudgetError(RuntimeError):
    """State budget or per-run step cap exceeded (reported, never ignored)."""


@dataclass(frozen=True)
class ConcreteVerdictSet:
    """Per-assertion outcome over all explored runs."""

    verdicts: dict[int, str]  # aid -> "holds-on-all-runs" | "violated"
    run_count: int

    def holds(self, aid: int) -> bool:
        return self.verdicts[aid] == "holds-on-all-runs"


class _Halt(Exception):
    """Internal: terminate the current path."""


def _exec_function(fn: Function, violated: set[int],
                   max_states: int, max_steps_per_run: int,
                   runs_so_far: int) -> int:
    if fn.params:
        raise ExecutionBudgetError(
            f"function {fn.name!r} has parameters; concrete execution "
            "requires closed functions (use havoc for inputs)")

    # Each stack entry is a resumable path: (block id, stmt index, env, arrays, steps).
    stack: list[tuple[str, int, dict, dict, int]] = [(fn.entry, 0, {}, {}, 0)]
    runs = runs_so_far

    while stack:
        bid, idx, env, arrays, steps = stack.pop()
        try:
            while True:
                block = fn.blocks[bid]
                stmts = block.stmts
                while idx < len(stmts):
                    stmt = stmts[idx]
                    idx += 1
                    steps += 1
                    if steps > max_steps_per_run:
                        raise ExecutionBudgetError(
                            f"per-run step cap of {max_steps_per_run} exceeded "
                            f"in {fn.name!r}")
                    kind = type(stmt)
                    if kind is Assign:
                        env[stmt.var] = stmt.expr.eval(env)
                    elif kind is BinOp:
                        a = stmt.lhs.eval(env)
                        b = stmt.rhs.eval(env)
                        if stmt.op == "+":
                            env[stmt.var] = a + b
                        elif stmt.op == "-":
                            env[stmt.var] = a - b
                        elif stmt.op == "*":
                            env[stmt.var] = a * b
                        elif b == 0:
                            raise _Halt  # runtime fault ends the path
                        else:
                            env[stmt.var] = tdiv(a, b) if stmt.op == "/" else tmod(a, b)
                    elif kind is BoolAssign:
                        try:
                            env[stmt.var] = eval_cond(stmt.expr, env)
                        except ZeroDivisionError:
                            raise _Halt from None
                    elif kind is Havoc:
                        if stmt.lo is None or stmt.hi is None:
                            raise ExecutionBudgetError(
                                f"havoc on {stmt.var!r} has infinite bounds")
                        values = range(stmt.lo, stmt.hi + 1)
                        # Fork: continue this path with the first value, queue the rest.
                        for v in reversed(values[1:]):
                            forked = dict(env)
                            forked[stmt.var] = v
                            stack.append((bid, idx, forked,
                                          {a: dict(cells) for a, cells in arrays.items()},
                                          steps))
                        env[stmt.var] = values[0]
                    elif kind is Assume:
                        try:
                            ok = eval_cond(stmt.cond, env)
                        except ZeroDivisionError:
                            raise _Halt from None
                        if not ok:
                            raise _Halt
                    elif kind is Assert:
                        try:
                            ok = eval_cond(stmt.cond, env)
                        except ZeroDivisionError:
                            raise _Halt from None
                        if not ok:
                            violated.add(stmt.aid)
                    elif kind is ArrStore:
                        i = stmt.index.eval(env)
                        if not 0 <= i < env[len_var(stmt.array)]:
                            raise _Halt
                        arrays.setdefault(stmt.array, {})[i] = stmt.value.eval(env)
                    elif kind is ArrLoad:
                        i = stmt.index.eval(env)
                        if not 0 <= i < env[len_var(stmt.array)]:
                            raise _Halt
                        env[stmt.var] = arrays.get(stmt.array, {}).get(i, 0)
                    elif kind is Alloc:
                        env[status_var(stmt.handle)] = 1
                    elif kind is Free:
                        env[status_var(stmt.handle)] = 0
                    # Deref is a no-op beyond its guard.
                term = block.term
                steps += 1
                if steps > max_steps_per_run:
                    raise ExecutionBudgetError(
                        f"per-run step cap of {max_steps_per_run} exceeded "
                        f"in {fn.name!r}")
                if isinstance(term, Return):
                    raise _Halt
                if isinstance(term, Goto):
                    bid, idx = term.target, 0
                else:
                    assert isinstance(term, Branch)
                    try:
                        taken = eval_cond(term.cond, env)
                    except ZeroDivisionError:
                        raise _Halt from None
                    bid = term.then_target if taken else term.else_target
                    idx = 0
        except _Halt:
            runs += 1
            if runs > max_states:
                raise ExecutionBudgetError(
                    f"state budget of {max_states} runs exceeded in {fn.name!r}")
    return runs


def concrete_run_all(program: Program, max_states: int = 1_000_000,
                     max_steps_per_run: int = 100_000) -> ConcreteVerdictSet:
    """Execute all input combinations; classify every assertion."""
    violated: set[int] = set()
    runs = 0
    for fn in program.functions:
        runs = _exec_function(fn, violated, max_states, max_steps_per_run, runs)
    verdicts = {}
    for _, stmt in program.assertions():
        verdicts[stmt.aid] = "violated" if stmt.aid in violated else "holds-on-all-runs"
    return ConcreteVerdictSet(verdicts=verdicts, run_count=runs)
