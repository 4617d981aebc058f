"""Two-phase recipe optimization and the strategy instantiations.

Phase 1 searches domain sequences: for each length tier l = 1..l_max it asks
the strategy for i_dom*l candidates, keeping the best cost seen and letting
the strategy decide which candidate becomes the next mutation base.  Phase 2
mutates one setting of the best recipe at a time for i_set iterations.  The
initial recipe is evaluated once before the loops and is not counted as an
iteration.

All randomness flows through one seeded Mersenne-Twister stream
(random.Random).  Draw order is fixed: the action draw first, then index
draws, then value draws, so decision traces are comparable across runs.

Strategies: rs and dars regenerate from scratch (accept nothing), sa mutates
its current recipe and accepts worse costs with probability
exp(-delta * (1 + i)) at phase-1 iteration i, hc mutates greedily and
replaces its current recipe with a fresh random one every tenth candidate.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass, field

from .analyzer import (ALLOWED_VALUES, DEFAULT_SETTINGS,
                       MOST_PRECISE_SETTINGS, Ingredient, ResourceBudget,
                       Settings, SETTING_FIELDS)
from .domains.poset import CANONICAL_ORDER, DomainId, DomainPoset, default_poset
from .ir.nodes import Program
from .recipes import INFINITE_COST, Recipe, evaluate

RETRY_CAP = 64
HC_RESTART_PERIOD = 10
SA_BASE_TEMPERATURE = 1.0


class GenerationError(RuntimeError):
    """Recipe generation exhausted its retry budget or has no valid choice."""


class Rng(random.Random):
    """Seeded Mersenne-Twister stream used for every stochastic choice."""


@dataclass(frozen=True)
class SearchSpace:
    """Domains and per-setting value subsets the search may draw from."""

    domains: tuple[DomainId, ...]
    setting_values: dict  # field -> tuple of allowed values

    @staticmethod
    def full(poset: DomainPoset) -> "SearchSpace":
        return SearchSpace(domains=poset.implemented_ids(),
                           setting_values=dict(ALLOWED_VALUES))

    def validate(self, poset: DomainPoset) -> "SearchSpace":
        for d in self.domains:
            poset.require(d)
            if d not in poset.implemented:
                raise ValueError(f"domain {d.token!r} is not implemented")
        for name in SETTING_FIELDS:
            values = self.setting_values.get(name)
            if not values:
                raise ValueError(f"no allowed values for setting {name!r}")
            bad = set(values) - set(ALLOWED_VALUES[name])
            if bad:
                raise ValueError(f"values {bad} invalid for setting {name!r}")
        return self

    def default_settings(self) -> Settings:
        values = {}
        for name in SETTING_FIELDS:
            allowed = self.setting_values[name]
            table_default = getattr(DEFAULT_SETTINGS, name)
            values[name] = table_default if table_default in allowed else allowed[0]
        return Settings(**values)

    def random_settings(self, rng: Rng) -> Settings:
        return Settings(**{name: rng.choice(self.setting_values[name])
                           for name in SETTING_FIELDS})

    def settings_combos(self):
        names = SETTING_FIELDS
        for combo in itertools.product(*(self.setting_values[n] for n in names)):
            yield Settings(**dict(zip(names, combo)))


@dataclass(frozen=True)
class TunerConfig:
    budget: ResourceBudget
    l_max: int = 3
    i_dom: int = 5
    i_set: int = 10
    strategy: str = "dars"
    seed: int = 0
    rec_init: Recipe | None = None
    poset: DomainPoset = field(default_factory=default_poset)
    space: SearchSpace | None = None

    def __post_init__(self):
        if self.l_max < 1:
            raise ValueError("l_max must be at least 1")
        if self.i_dom < 1:
            raise ValueError("i_dom must be at least 1")
        if self.i_set < 0:
            raise ValueError("i_set cannot be negative")
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {self.strategy!r}")

    def resolved_space(self) -> SearchSpace:
        space = self.space if self.space is not None else SearchSpace.full(self.poset)
        return space.validate(self.poset)

    def resolved_rec_init(self) -> Recipe:
        if self.rec_init is not None:
            return self.rec_init
        space = self.resolved_space()
        if DomainId.INTERVALS in space.domains:
            first = DomainId.INTERVALS
        else:
            first = self.poset.minimal_of(space.domains)[0]
        return Recipe((Ingredient(first, space.default_settings()),))


@dataclass(frozen=True)
class TraceEntry:
    iteration: int
    phase: str  # "domains" | "settings"
    recipe: Recipe
    cost: object
    accepted: bool
    best_cost: object
    restart: bool = False


SearchTrace = list  # of TraceEntry


def poset_compatible(recipe: Recipe, poset: DomainPoset) -> bool:
    domains = recipe.domains()
    for i, a in enumerate(domains):
        for b in domains[i + 1:]:
            if poset.comparable(a, b):
                return False
    return True


# ---------------------------------------------------------------------------
# Recipe generation
# ---------------------------------------------------------------------------

def generate_rs(l: int, rng: Rng, space: SearchSpace) -> Recipe:
    """Uniform independent domain and setting choice per ingredient."""
    return Recipe(tuple(Ingredient(rng.choice(space.domains),
                                   space.random_settings(rng))
                        for _ in range(l)))


def generate_dars(l: int, poset: DomainPoset, rng: Rng, space: SearchSpace,
                  retry_cap: int = RETRY_CAP) -> Recipe:
    """Like rs but rejects domain tuples with comparable pairs."""
    for _ in range(retry_cap):
        domains = [rng.choice(space.domains) for _ in range(l)]
        ok = True
        for i, a in enumerate(domains):
            for b in domains[i + 1:]:
                if poset.comparable(a, b):
                    ok = False
                    break
            if not ok:
                break
        if ok:
            return Recipe(tuple(Ingredient(d, space.random_settings(rng))
                                for d in domains))
    raise GenerationError(
        f"no pairwise-incomparable domain tuple of length {l} found in "
        f"{retry_cap} attempts")


def rand_poset_least_inc(recipe: Recipe | None, poset: DomainPoset, rng: Rng,
                         space: SearchSpace) -> DomainId:
    """Uniform draw among the least-precise domains incomparable to every
    domain already in the recipe."""
    present = recipe.domains() if recipe is not None else ()
    candidates = [d for d in space.domains
                  if all(not poset.comparable(d, used) for used in present)]
    if not candidates:
        raise GenerationError("no incomparable domain available")
    minimal = poset.minimal_of(candidates)
    return rng.choice(minimal)


def _draw_action(rng: Rng) -> str:
    return "add" if rng.random() < 0.2 else "mod"


def _draw_mod_action(rng: Rng) -> str:
    u = rng.random()
    if u < 0.5:
        return "gt"
    if u < 0.8:
        return "lt"
    return "inc"


def generate_mutate(recipe: Recipe, l_max: int, poset: DomainPoset, rng: Rng,
                    space: SearchSpace, retry_cap: int = RETRY_CAP) -> Recipe:
    """One ADD/MOD mutation keeping the result poset-compatible.

    Draw order per attempt: the ADD/MOD action, then (for MOD) the ingredient
    index and the GT/LT/INC sub-action, then the replacement domain.  A GT on
    a maximal domain or LT on a minimal one re-draws the sub-action; a result
    with comparable domains retries from the original recipe.
    """
    allowed = set(space.domains)
    for _ in range(retry_cap):
        action = _draw_action(rng)
        if action == "add" and len(recipe.ingredients) < l_max:
            try:
                domain = rand_poset_least_inc(recipe, poset, rng, space)
            except GenerationError:
                continue
            mutated = Recipe(recipe.ingredients
                             + (Ingredient(domain, space.default_settings()),))
        else:
            idx = rng.randrange(len(recipe.ingredients))
            old = recipe.ingredients[idx]
            domain = None
            for _ in range(retry_cap):
                mod = _draw_mod_action(rng)
                if mod == "gt":
                    options = [d for d in poset.immediate_successors(old.domain)
                               if d in allowed]
                elif mod == "lt":
                    options = [d for d in poset.immediate_predecessors(old.domain)
                               if d in allowed]
                else:
                    rest = Recipe(recipe.ingredients[:idx] + recipe.ingredients[idx + 1:]) \
                        if len(recipe.ingredients) > 1 else None
                    try:
                        options = [rand_poset_least_inc(rest, poset, rng, space)]
                    except GenerationError:
                        options = []
                if options:
                    domain = options[0] if len(options) == 1 else rng.choice(options)
                    break
            if domain is None:
                continue
            replaced = Ingredient(domain, old.settings)
            mutated = Recipe(recipe.ingredients[:idx] + (replaced,)
                             + recipe.ingredients[idx + 1:])
        if poset_compatible(mutated, poset):
            return mutated
    raise GenerationError(f"mutation retries exhausted after {retry_cap} attempts")


def mutate_settings(recipe: Recipe, rng: Rng, space: SearchSpace) -> Recipe:
    """Change exactly one setting of one ingredient to a different allowed
    value; domains are never touched."""
    idx = rng.randrange(len(recipe.ingredients))
    ing = recipe.ingredients[idx]
    mutable = [name for name in SETTING_FIELDS
               if len(space.setting_values[name]) >= 2]
    if not mutable:
        raise GenerationError("every setting is pinned to a single value")
    name = rng.choice(mutable)
    current = getattr(ing.settings, name)
    choices = [v for v in space.setting_values[name] if v != current]
    value = rng.choice(choices)
    changed = Ingredient(ing.domain, ing.settings.replace(**{name: value}))
    return Recipe(recipe.ingredients[:idx] + (changed,)
                  + recipe.ingredients[idx + 1:])


# ---------------------------------------------------------------------------
# Accept functions
# ---------------------------------------------------------------------------

def accept_rs(cost_cur, cost_next) -> bool:
    return False


def accept_hc(cost_cur, cost_next) -> bool:
    return cost_next < cost_cur


def accept_sa(cost_cur, cost_next, i: int, rng: Rng,
              t0: float = SA_BASE_TEMPERATURE) -> bool:
    if cost_next == INFINITE_COST:
        return False
    if cost_next < cost_cur:
        return True
    delta = float(cost_next - cost_cur)
    return rng.random() < math.exp(-delta * (1 + i) / t0)


# ---------------------------------------------------------------------------
# Strategies
# ---------------------------------------------------------------------------

class _Strategy:
    name = ""

    def __init__(self, poset: DomainPoset, space: SearchSpace, l_max: int):
        self.poset = poset
        self.space = space
        self.l_max = l_max

    def generate(self, current: Recipe, l: int, rng: Rng):
        raise NotImplementedError

    def accept(self, cost_cur, cost_next, i: int, rng: Rng) -> bool:
        raise NotImplementedError


class _RandomSampling(_Strategy):
    name = "rs"

    def generate(self, current, l, rng):
        return generate_rs(l, rng, self.space), False

    def accept(self, cost_cur, cost_next, i, rng):
        return accept_rs(cost_cur, cost_next)


class _DomainAwareSampling(_Strategy):
    name = "dars"

    def generate(self, current, l, rng):
        return generate_dars(l, self.poset, rng, self.space), False

    def accept(self, cost_cur, cost_next, i, rng):
        return accept_rs(cost_cur, cost_next)


class _SimulatedAnnealing(_Strategy):
    name = "sa"

    def generate(self, current, l, rng):
        return generate_mutate(current, l, self.poset, rng, self.space), False

    def accept(self, cost_cur, cost_next, i, rng):
        return accept_sa(cost_cur, cost_next, i, rng)


class _HillClimbing(_Strategy):
    name = "hc"

    def __init__(self, poset, space, l_max):
        super().__init__(poset, space, l_max)
        self.generated = 0

    def generate(self, current, l, rng):
        self.generated += 1
        if self.generated % HC_RESTART_PERIOD == 0:
            return generate_dars(l, self.poset, rng, self.space), True
        return generate_mutate(current, l, self.poset, rng, self.space), False

    def accept(self, cost_cur, cost_next, i, rng):
        return accept_hc(cost_cur, cost_next)


STRATEGIES = {
    "rs": _RandomSampling,
    "dars": _DomainAwareSampling,
    "sa": _SimulatedAnnealing,
    "hc": _HillClimbing,
}


# ---------------------------------------------------------------------------
# The optimization engine
# ---------------------------------------------------------------------------

def optimize(program: Program, cfg: TunerConfig) -> tuple[Recipe, SearchTrace]:
    rng = Rng(cfg.seed)
    space = cfg.resolved_space()
    strategy = STRATEGIES[cfg.strategy](cfg.poset, space, cfg.l_max)
    trace: SearchTrace = []

    rec_init = cfg.resolved_rec_init()
    best = current = rec_init
    best_cost = current_cost = evaluate(program, rec_init, cfg.budget).cost

    iteration = 0
    phase1_index = 0
    for l in range(1, cfg.l_max + 1):
        for _ in range(cfg.i_dom * l):
            candidate, restarted = strategy.generate(current, l, rng)
            next_cost = evaluate(program, candidate, cfg.budget).cost
            iteration += 1
            if next_cost < best_cost:
                best, best_cost = candidate, next_cost
            accepted = strategy.accept(current_cost, next_cost, phase1_index, rng)
            phase1_index += 1
            if restarted or accepted:
                current, current_cost = candidate, next_cost
            trace.append(TraceEntry(iteration, "domains", candidate, next_cost,
                                    accepted, best_cost, restarted))

    mutable = any(len(space.setting_values[name]) >= 2 for name in SETTING_FIELDS)
    for _ in range(cfg.i_set if mutable else 0):
        candidate = mutate_settings(best, rng, space)
        next_cost = evaluate(program, candidate, cfg.budget).cost
        iteration += 1
        improved = next_cost < best_cost
        if improved:
            best, best_cost = candidate, next_cost
        trace.append(TraceEntry(iteration, "settings", candidate, next_cost,
                                improved, best_cost))

    return best, trace


def expected_candidates(l_max: int, i_dom: int, i_set: int) -> int:
    return i_dom * l_max * (l_max + 1) // 2 + i_set


# ---------------------------------------------------------------------------
# Exhaustive oracle and the most-precise recipe
# ---------------------------------------------------------------------------

class SpaceCapError(RuntimeError):
    pass


def enumerate_space(space: SearchSpace, poset: DomainPoset, max_len: int):
    """All ordered poset-compatible recipes up to max_len, in lexicographic
    (length, canonical domain order, setting order) order."""
    order = {d: i for i, d in enumerate(CANONICAL_ORDER)}
    domains = sorted(space.domains, key=order.__getitem__)
    settings = list(space.settings_combos())
    for length in range(1, max_len + 1):
        for combo in itertools.product(domains, repeat=length):
            ok = True
            for i, a in enumerate(combo):
                for b in combo[i + 1:]:
                    if poset.comparable(a, b):
                        ok = False
                        break
                if not ok:
                    break
            if not ok:
                continue
            for settings_combo in itertools.product(settings, repeat=length):
                yield Recipe(tuple(Ingredient(d, s)
                                   for d, s in zip(combo, settings_combo)))


def enumerate_exhaustive(program: Program, space: SearchSpace,
                         poset: DomainPoset, max_len: int,
                         budget: ResourceBudget, cap: int = 5000
                         ) -> tuple[Recipe, object, int]:
    """Evaluate the whole restricted space; return (best recipe, cost, size).

    Ties keep the first recipe in enumeration order.
    """
    recipes = list(enumerate_space(space, poset, max_len))
    if len(recipes) > cap:
        raise SpaceCapError(f"{len(recipes)} recipes exceed the cap of {cap}")
    if not recipes:
        raise SpaceCapError("restricted space contains no compatible recipe")
    best = None
    best_cost = None
    for recipe in recipes:
        c = evaluate(program, recipe, budget).cost
        if best is None or c < best_cost:
            best, best_cost = recipe, c
    return best, best_cost, len(recipes)


def most_precise_recipe(poset: DomainPoset) -> Recipe:
    """One ingredient per maximal implemented domain, most-precise settings,
    in canonical domain order."""
    return Recipe(tuple(Ingredient(d, MOST_PRECISE_SETTINGS)
                        for d in poset.maximal_implemented()))
