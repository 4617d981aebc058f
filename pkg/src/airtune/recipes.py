"""Recipes: ordered ingredient sequences, their chained evaluation, and cost.

Evaluating a recipe runs the analyzer once per ingredient, each time only on
the assertions no earlier ingredient verified, and converts freshly verified
assertions into assumptions before the next ingredient runs.  The cost of the
outcome is (w + r/r_max) / w_total within budget and infinite otherwise, so
fewer warnings always win and resource consumption breaks ties.

In steps mode every quantity is integral and costs are exact Fractions; in
wall mode costs are floats.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction

from .analyzer import (ALLOWED_VALUES, SETTING_FIELDS, AnalysisResult,
                       BudgetExceededError, DEFAULT_SETTINGS, Ingredient,
                       ResourceBudget, Settings, analyze, collect_thresholds)
from .domains.api import get_domain
from .domains.poset import DomainId, domain_from_token
from .ir.nodes import Assert, Assume, Block, Function, Program

INFINITE_COST = math.inf


@dataclass(frozen=True)
class Recipe:
    ingredients: tuple[Ingredient, ...]

    def __post_init__(self):
        if not self.ingredients:
            raise ValueError("a recipe needs at least one ingredient")

    def domains(self) -> tuple[DomainId, ...]:
        return tuple(ing.domain for ing in self.ingredients)


@dataclass(frozen=True)
class RecipeOutcome:
    verdicts: dict  # assertion id -> "safe" | "warning"
    w: int
    w_total: int
    r: float
    cost: object  # Fraction | float | math.inf
    per_ingredient: tuple  # ((newly verified ids...), resource) per ingredient

    def verified(self) -> frozenset[int]:
        return frozenset(a for a, v in self.verdicts.items() if v == "safe")


def cost(w: int, w_total: int, r, r_max):
    """(w + r/r_max) / w_total when within budget, infinite otherwise."""
    if w_total < 1:
        raise ValueError("w_total must be at least 1")
    if not 0 <= w <= w_total:
        raise ValueError("w must lie in [0, w_total]")
    if r < 0:
        raise ValueError("resource consumption cannot be negative")
    if r > r_max:
        return INFINITE_COST
    if isinstance(r, int) and isinstance(r_max, int):
        return Fraction(w * r_max + r, w_total * r_max)
    return (w + r / r_max) / w_total


def inject_assumptions(program: Program, verified: set[int]) -> Program:
    """Replace each verified assertion by an assumption of its condition."""
    known = program.assertion_ids()
    unknown = set(verified) - known
    if unknown:
        raise KeyError(f"unknown assertion ids: {sorted(unknown)}")
    if not verified:
        return program
    functions = []
    for fn in program.functions:
        blocks = {}
        for block in fn.blocks.values():
            stmts = tuple(
                Assume(s.cond) if isinstance(s, Assert) and s.aid in verified else s
                for s in block.stmts)
            blocks[block.bid] = Block(block.bid, stmts, block.term)
        functions.append(Function(
            name=fn.name, params=fn.params, blocks=blocks, entry=fn.entry,
            var_types=dict(fn.var_types), arrays=fn.arrays, handles=fn.handles))
    return Program(tuple(functions))


def evaluate(program: Program, recipe: Recipe, budget: ResourceBudget
             ) -> RecipeOutcome:
    """Run the recipe, sharing results between ingredients via assumptions."""
    for ing in recipe.ingredients:
        get_domain(ing.domain)  # unimplemented domains are rejected up front

    all_aids = sorted(program.assertion_ids())
    if not all_aids:
        raise ValueError("program has no assertions to check")
    w_total = len(all_aids)
    integral = budget.mode == "steps"
    limit = int(budget.limit) if integral else budget.limit

    verified: set[int] = set()
    consumed = 0 if integral else 0.0
    per_ingredient: list[tuple[tuple[int, ...], object]] = []
    exceeded = False
    current = program
    threshold_cache: dict[int, list[int]] = {}

    for ing in recipe.ingredients:
        n = ing.settings.widen_thresholds
        if n not in threshold_cache:
            # Injection preserves conditions, so thresholds are stable.
            threshold_cache[n] = collect_thresholds(program, n)
        thresholds = threshold_cache[n]
        newly: set[int] = set()
        spent = 0 if integral else 0.0
        for fn in current.functions:
            targets = {a.aid for a in fn.assertions()} - verified
            if not targets:
                continue
            remaining = limit - consumed - spent
            if remaining <= 0:
                exceeded = True
                break
            try:
                result = analyze(fn, ing, targets,
                                 ResourceBudget(budget.mode, remaining),
                                 thresholds)
            except BudgetExceededError as err:
                spent += err.steps if integral else err.wall_time
                exceeded = True
                break
            spent += result.steps if integral else result.wall_time
            newly.update(a for a, v in result.verdicts.items() if v == "safe")
        per_ingredient.append((tuple(sorted(newly)), spent))
        consumed += spent
        verified.update(newly)
        if exceeded:
            break
        if newly:
            current = inject_assumptions(current, newly)

    verdicts = {a: ("safe" if a in verified else "warning") for a in all_aids}
    w = w_total - len(verified)
    total_cost = INFINITE_COST if exceeded or consumed > limit else \
        cost(w, w_total, consumed, limit)
    return RecipeOutcome(verdicts=verdicts, w=w, w_total=w_total, r=consumed,
                         cost=total_cost, per_ingredient=tuple(per_ingredient))


# ---------------------------------------------------------------------------
# Recipe file format
# ---------------------------------------------------------------------------

class RecipeFormatError(ValueError):
    pass


_ONOFF = {"on": True, "off": False}


def parse_recipe(text: str) -> Recipe:
    ingredients: list[Ingredient] = []
    current: dict | None = None

    def flush():
        nonlocal current
        if current is None:
            return
        if "domain" not in current:
            raise RecipeFormatError("[ingredient] section without a domain")
        settings = DEFAULT_SETTINGS.replace(
            **{k: v for k, v in current.items() if k != "domain"}).validate()
        ingredients.append(Ingredient(current["domain"], settings))
        current = None

    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line == "[ingredient]":
            flush()
            current = {}
            continue
        if current is None:
            raise RecipeFormatError(f"line {lineno}: content before [ingredient]")
        m = re.fullmatch(r"(\S+)\s*=\s*(\S+)", line)
        if not m:
            raise RecipeFormatError(f"line {lineno}: expected key = value")
        key, value = m.group(1), m.group(2)
        if key == "domain":
            current["domain"] = domain_from_token(value)
        elif key in ("delay_widen", "narrow_iters", "widen_thresholds"):
            try:
                current[key] = int(value)
            except ValueError:
                raise RecipeFormatError(
                    f"line {lineno}: {key} needs an integer") from None
        elif key in ("backward", "smashing"):
            if value not in _ONOFF:
                raise RecipeFormatError(f"line {lineno}: {key} must be on/off")
            current[key] = _ONOFF[value]
        else:
            raise RecipeFormatError(f"line {lineno}: unknown key {key!r}")
    flush()
    if not ingredients:
        raise RecipeFormatError("recipe file declares no ingredients")
    return Recipe(tuple(ingredients))


def recipe_to_text(recipe: Recipe) -> str:
    lines = []
    for ing in recipe.ingredients:
        lines.append("[ingredient]")
        lines.append(f"domain = {ing.domain.token}")
        s = ing.settings
        lines.append(f"delay_widen = {s.delay_widen}")
        lines.append(f"narrow_iters = {s.narrow_iters}")
        lines.append(f"widen_thresholds = {s.widen_thresholds}")
        lines.append(f"backward = {'on' if s.backward else 'off'}")
        lines.append(f"smashing = {'on' if s.smashing else 'off'}")
        lines.append("")
    return "\n".join(lines)


def recipe_to_json(recipe: Recipe) -> list[dict]:
    return [{"domain": ing.domain.token,
             **{f: getattr(ing.settings, f) for f in SETTING_FIELDS}}
            for ing in recipe.ingredients]


def recipe_from_json(data: list[dict]) -> Recipe:
    ingredients = []
    for entry in data:
        settings = Settings(**{f: entry[f] for f in SETTING_FIELDS})
        ingredients.append(Ingredient(domain_from_token(entry["domain"]), settings))
    return Recipe(tuple(ingredients))


def cost_to_json(v):
    if v == INFINITE_COST:
        return "inf"
    if isinstance(v, Fraction):
        return f"{v.numerator}/{v.denominator}"
    return v


def cost_from_json(v):
    if v == "inf":
        return INFINITE_COST
    if isinstance(v, str):
        num, _, den = v.partition("/")
        return Fraction(int(num), int(den))
    return v
