"""Intra-procedural fixpoint engine.

Forward Kleene iteration in reverse postorder with delayed widening at loop
heads (back-edge targets), widening with program-constant thresholds, a fixed
number of whole-function narrowing passes, and an optional backward
necessary-precondition pass per unproven assertion.  Arrays are smashed into
one summary cell with weak updates when smashing is on; with smashing off,
loads are havoc and stores don't touch the numeric store.

The abstract step counter (one tick per forward or backward transfer,
including branch-edge filters) is the deterministic resource measure; wall
time is sampled every 64 steps when a wall budget is active.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

from .domains.api import get_domain
from .domains.base import BOTTOM
from .domains.poset import DomainId
from .ir.nodes import (Assert, Assign, Assume, BinExpr, BoolAssign, Branch,
                       Cmp, Goto, Havoc, LinExpr, Program, Return, cell_var,
                       lin_const, negate)

DELAY_WIDEN_VALUES = (1, 2, 4, 8, 16)
NARROW_ITERS_VALUES = (1, 2, 3, 4)
WIDEN_THRESHOLDS_VALUES = (0, 10, 20, 30, 40)
ONOFF_VALUES = (False, True)

SETTING_FIELDS = ("delay_widen", "narrow_iters", "widen_thresholds",
                  "backward", "smashing")

ALLOWED_VALUES = {
    "delay_widen": DELAY_WIDEN_VALUES,
    "narrow_iters": NARROW_ITERS_VALUES,
    "widen_thresholds": WIDEN_THRESHOLDS_VALUES,
    "backward": ONOFF_VALUES,
    "smashing": ONOFF_VALUES,
}


@dataclass(frozen=True)
class Settings:
    """Analysis knobs.  The searchable value sets live in ALLOWED_VALUES and
    are enforced at all configuration surfaces via validate(); the engine
    itself also accepts out-of-table values (e.g. narrow_iters=0) so that the
    effect of a knob can be isolated in tests."""

    delay_widen: int = 1
    narrow_iters: int = 2
    widen_thresholds: int = 0
    backward: bool = False
    smashing: bool = True

    def validate(self) -> "Settings":
        for name in SETTING_FIELDS:
            value = getattr(self, name)
            if value not in ALLOWED_VALUES[name]:
                raise ValueError(
                    f"setting {name}={value!r} outside the allowed set "
                    f"{ALLOWED_VALUES[name]}")
        return self

    def replace(self, **kw) -> "Settings":
        values = {name: getattr(self, name) for name in SETTING_FIELDS}
        values.update(kw)
        return Settings(**values)


DEFAULT_SETTINGS = Settings()
MOST_PRECISE_SETTINGS = Settings(delay_widen=16, narrow_iters=4,
                                 widen_thresholds=40, backward=True,
                                 smashing=True)


@dataclass(frozen=True)
class Ingredient:
    domain: DomainId
    settings: Settings = DEFAULT_SETTINGS


@dataclass
class AnalysisResult:
    verdicts: dict  # assertion id -> "safe" | "warning"
    invariants: dict  # (block id, stmt index) -> abstract state
    steps: int
    wall_time: float


class BudgetExceededError(RuntimeError):
    def __init__(self, steps: int, wall_time: float):
        self.steps = steps
        self.wall_time = wall_time
        super().__init__(f"analysis budget exceeded after {steps} steps")


@dataclass(frozen=True)
class ResourceBudget:
    """r_max: wall-clock seconds or abstract transfer steps."""

    mode: str  # "wall" | "steps"
    limit: float

    def __post_init__(self):
        if self.mode not in ("wall", "steps"):
            raise ValueError(f"unknown budget mode {self.mode!r}")
        if not self.limit > 0:
            raise ValueError("budget limit must be positive")


def collect_thresholds(program: Program, n: int) -> list[int]:
    """The n distinct constants from comparisons and havoc bounds with the
    smallest absolute values (ties toward the smaller value), ascending."""
    if n <= 0:
        return []
    found: set[int] = set()

    def from_lin(e: LinExpr) -> None:
        if not e.terms or e.const != 0:
            found.add(e.const)

    def from_side(side) -> None:
        if isinstance(side, LinExpr):
            from_lin(side)
        else:
            from_lin(side.lhs)
            from_lin(side.rhs)

    def from_cond(cond) -> None:
        t = type(cond)
        if t is Cmp:
            from_side(cond.lhs)
            from_side(cond.rhs)
        elif hasattr(cond, "args"):
            for a in cond.args:
                from_cond(a)
        elif hasattr(cond, "arg"):
            from_cond(cond.arg)

    for fn in program.functions:
        for block in fn.blocks.values():
            for stmt in block.stmts:
                if isinstance(stmt, (Assume, Assert)):
                    from_cond(stmt.cond)
                elif isinstance(stmt, BoolAssign):
                    from_cond(stmt.expr)
                elif isinstance(stmt, Havoc):
                    if stmt.lo is not None:
                        found.add(stmt.lo)
                    if stmt.hi is not None:
                        found.add(stmt.hi)
            if isinstance(block.term, Branch):
                from_cond(block.term.cond)

    picked = sorted(found, key=lambda v: (abs(v), v))[:n]
    return sorted(picked)


def function_vars(fn) -> tuple[tuple[str, ...], tuple[str, ...]]:
    """Ordered (numeric, boolean) variable tuples, including synthetics."""
    numeric: list[str] = []
    bools: list[str] = []
    seen: set[str] = set()

    def add(v: str) -> None:
        if v in seen:
            return
        seen.add(v)
        if fn.var_types.get(v, "int") == "bool":
            bools.append(v)
        else:
            numeric.append(v)

    for p in fn.params:
        add(p)
    for v in fn.var_types:
        add(v)
    for a in sorted(fn.arrays):
        add(cell_var(a))
    return tuple(numeric), tuple(bools)


class _Budget:
    __slots__ = ("mode", "limit", "steps", "start")

    def __init__(self, budget: ResourceBudget):
        self.mode = budget.mode
        self.limit = budget.limit
        self.steps = 0
        self.start = time.monotonic()

    def tick(self, n: int = 1) -> None:
        self.steps += n
        if self.mode == "steps":
            if self.steps > self.limit:
                raise BudgetExceededError(self.steps, time.monotonic() - self.start)
        elif self.steps % 64 < n:
            elapsed = time.monotonic() - self.start
            if elapsed > self.limit:
                raise BudgetExceededError(self.steps, elapsed)


class _Engine:
    def __init__(self, fn, ingredient: Ingredient, thresholds: list[int],
                 budget: _Budget):
        self.fn = fn
        self.domain = get_domain(ingredient.domain)
        self.settings = ingredient.settings
        self.thresholds = thresholds
        self.budget = budget
        self.rpo, self.loop_heads = self._order_blocks()
        self.rpo_index = {b: i for i, b in enumerate(self.rpo)}
        self.succs = {b: self._block_succs(b) for b in fn.blocks}
        self.preds: dict[str, list[tuple[str, int]]] = {b: [] for b in fn.blocks}
        for b, ss in self.succs.items():
            for k, s in enumerate(ss):
                if s in self.preds:
                    self.preds[s].append((b, k))

    def _block_succs(self, bid) -> tuple[str, ...]:
        term = self.fn.blocks[bid].term
        if isinstance(term, Goto):
            return (term.target,)
        if isinstance(term, Branch):
            return (term.then_target, term.else_target)
        return ()

    def _order_blocks(self):
        order: list[str] = []
        on_stack: set[str] = set()
        visited: set[str] = set()
        heads: set[str] = set()

        def dfs(b: str) -> None:
            visited.add(b)
            on_stack.add(b)
            for s in self._block_succs(b):
                if s in on_stack:
                    heads.add(s)
                elif s not in visited:
                    dfs(s)
            on_stack.discard(b)
            order.append(b)

        dfs(self.fn.entry)
        order.reverse()
        return order, heads

    def entry_state(self):
        numeric, bools = function_vars(self.fn)
        state = self.domain.make_top(numeric, bools)
        if self.settings.smashing:
            for a in sorted(self.fn.arrays):
                state = self.domain.transfer(
                    state, Assign(cell_var(a), lin_const(0)), True)
        return state

    # -- forward pass ----------------------------------------------------------

    def _apply_block(self, bid: str, state, record: dict | None = None):
        """Run the block's statements; return per-successor edge states."""
        dom = self.domain
        smashing = self.settings.smashing
        stmts = self.fn.blocks[bid].stmts
        for idx, stmt in enumerate(stmts):
            if record is not None:
                record[(bid, idx)] = state
            self.budget.tick()
            state = dom.transfer(state, stmt, smashing)
        if record is not None:
            record[(bid, len(stmts))] = state
        term = self.fn.blocks[bid].term
        if isinstance(term, Branch):
            self.budget.tick(2)
            return (dom.assume(state, term.cond),
                    dom.assume(state, negate(term.cond)))
        if isinstance(term, Goto):
            return (state,)
        return ()

    def _candidate(self, bid: str, edge_out: dict):
        dom = self.domain
        acc = self.entry_state() if bid == self.fn.entry else BOTTOM
        for pred, k in self.preds[bid]:
            contrib = edge_out.get((pred, k), BOTTOM)
            if contrib is BOTTOM:
                continue
            acc = contrib if acc is BOTTOM else dom.join(acc, contrib)
        return acc

    def forward(self) -> tuple[dict, dict]:
        dom = self.domain
        in_state: dict[str, object] = {b: BOTTOM for b in self.rpo}
        edge_out: dict[tuple[str, int], object] = {}
        widen_count: dict[str, int] = {}
        pending = set(self.rpo)

        while pending:
            bid = min(pending, key=self.rpo_index.__getitem__)
            pending.discard(bid)
            candidate = self._candidate(bid, edge_out)
            if bid in self.loop_heads and in_state[bid] is not BOTTOM:
                if dom.leq(candidate, in_state[bid]):
                    continue
                count = widen_count.get(bid, 0) + 1
                widen_count[bid] = count
                grown = dom.join(in_state[bid], candidate)
                if count <= self.settings.delay_widen:
                    new_state = grown
                else:
                    new_state = dom.widen(in_state[bid], grown, self.thresholds)
            else:
                if in_state[bid] is not BOTTOM and candidate == in_state[bid]:
                    continue
                if in_state[bid] is BOTTOM and candidate is BOTTOM \
                        and bid != self.fn.entry:
                    continue
                new_state = candidate
            in_state[bid] = new_state
            outs = self._apply_block(bid, new_state)
            for k, out in enumerate(outs):
                key = (bid, k)
                if edge_out.get(key, BOTTOM) != out:
                    edge_out[key] = out
                    pending.add(self.succs[bid][k])
        return in_state, edge_out

    def narrow_passes(self, in_state: dict, edge_out: dict) -> None:
        # Each pass recomputes every block from the current (still sound)
        # states; a candidate is only used where it is comparable below the
        # old state, which keeps the pass decreasing for any transfer.
        dom = self.domain
        iters = self.settings.narrow_iters
        for _ in range(iters):
            changed = False
            for bid in self.rpo:
                candidate = self._candidate(bid, edge_out)
                old = in_state[bid]
                if not dom.leq(candidate, old):
                    candidate = old
                if bid in self.loop_heads:
                    new_state = dom.narrow(old, candidate)
                else:
                    new_state = candidate
                if new_state != old:
                    changed = True
                in_state[bid] = new_state
                outs = self._apply_block(bid, new_state)
                for k, out in enumerate(outs):
                    edge_out[(bid, k)] = out
            if not changed:
                break

    def collect(self, in_state: dict) -> dict:
        invariants: dict = {}
        for bid in self.rpo:
            self._apply_block(bid, in_state[bid], record=invariants)
        return invariants

    # -- backward refinement -----------------------------------------------------

    def backward_refine(self, invariants: dict, bid: str, idx: int,
                        violation) -> bool:
        """One necessary-precondition round; True when the violation is
        unreachable from the function entry."""
        dom = self.domain
        smashing = self.settings.smashing
        bwd: dict[str, object] = {b: BOTTOM for b in self.rpo}
        visit_count: dict[str, int] = {}
        pending = {bid}

        def block_requirement(b: str):
            """Stores at b's entry that can lead to the violation."""
            blk = self.fn.blocks[b]
            term = blk.term
            state = BOTTOM
            if isinstance(term, Branch):
                then_req = bwd[term.then_target]
                else_req = bwd[term.else_target]
                if then_req is not BOTTOM:
                    self.budget.tick()
                    state = dom.assume(then_req, term.cond)
                if else_req is not BOTTOM:
                    self.budget.tick()
                    other = dom.assume(else_req, negate(term.cond))
                    state = other if state is BOTTOM else dom.join(state, other)
            elif isinstance(term, Goto):
                state = bwd[term.target]
            if state is not BOTTOM:
                state = dom.meet_over(state, invariants[(b, len(blk.stmts))])
            for i in range(len(blk.stmts) - 1, -1, -1):
                if b == bid and i == idx:
                    state = violation if state is BOTTOM else dom.join(state, violation)
                if state is BOTTOM:
                    continue
                self.budget.tick()
                state = dom.backward(state, blk.stmts[i], smashing)
                if state is not BOTTOM:
                    state = dom.meet_over(state, invariants[(b, i)])
            if b == bid and idx == len(blk.stmts):
                state = violation if state is BOTTOM else dom.join(state, violation)
            return state

        while pending:
            b = max(pending, key=self.rpo_index.__getitem__)
            pending.discard(b)
            req = block_requirement(b)
            old = bwd[b]
            if old is not BOTTOM and dom.leq(req, old):
                continue
            count = visit_count.get(b, 0) + 1
            visit_count[b] = count
            if old is BOTTOM:
                new_state = req
            elif count <= self.settings.delay_widen:
                new_state = dom.join(old, req)
            else:
                new_state = dom.widen(old, dom.join(old, req), self.thresholds)
            if old is not BOTTOM and dom.leq(new_state, old):
                continue
            bwd[b] = new_state
            for pred, _ in self.preds[b]:
                pending.add(pred)

        return bwd[self.fn.entry] is BOTTOM


def analyze(fn, ingredient: Ingredient, targets: set[int],
            budget: ResourceBudget, thresholds: list[int] | None = None
            ) -> AnalysisResult:
    """Analyze one function; classify each target assertion safe/warning."""
    get_domain(ingredient.domain)  # reject unimplemented domains up front
    if thresholds is None:
        thresholds = collect_thresholds(
            Program((fn,)), ingredient.settings.widen_thresholds)
    tracker = _Budget(budget)
    start = time.monotonic()
    engine = _Engine(fn, ingredient, thresholds, tracker)

    in_state, edge_out = engine.forward()
    engine.narrow_passes(in_state, edge_out)
    invariants = engine.collect(in_state)

    positions: dict[int, tuple[str, int, object]] = {}
    for b in engine.rpo:
        for i, stmt in enumerate(fn.blocks[b].stmts):
            if isinstance(stmt, Assert) and stmt.aid in targets:
                positions[stmt.aid] = (b, i, stmt.cond)

    verdicts: dict[int, str] = {}
    for aid in sorted(targets):
        if aid not in positions:  # assertion in dead code: trivially safe
            verdicts[aid] = "safe"
            continue
        b, i, cond = positions[aid]
        state = invariants[(b, i)]
        verdicts[aid] = "safe" if get_domain(ingredient.domain).entails(state, cond) \
            else "warning"

    if ingredient.settings.backward:
        dom = get_domain(ingredient.domain)
        for aid in sorted(targets):
            if verdicts[aid] == "safe" or aid not in positions:
                continue
            b, i, cond = positions[aid]
            violation = dom.assume(invariants[(b, i)], negate(cond))
            if violation is BOTTOM:
                verdicts[aid] = "safe"
                continue
            if engine.backward_refine(invariants, b, i, violation):
                verdicts[aid] = "safe"

    return AnalysisResult(verdicts=verdicts, invariants=invariants,
                          steps=tracker.steps,
                          wall_time=time.monotonic() - start)
