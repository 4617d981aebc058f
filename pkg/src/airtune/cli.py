"""Command-line surface: tune, analyze, compare, oracle, and replay.

Every command produces one structured JSON report; the table printed to
standard output is derived from that report, never the other way around.
Exit codes: 0 success, 2 user or configuration error, 3 internal error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

from .analyzer import DEFAULT_SETTINGS, Ingredient, ResourceBudget
from .domains.api import UnimplementedDomainError, get_domain
from .domains.poset import (DomainId, DomainPoset, PosetError, default_poset,
                            domain_from_token, parse_poset)
from .ir.nodes import KIND_TOKENS, Program
from .ir.parser import ParseError, parse_program
from .ir.instrument import instrument
from .optimizer import (GenerationError, SearchSpace, SpaceCapError,
                        TunerConfig, enumerate_exhaustive, most_precise_recipe,
                        optimize)
from .recipes import (INFINITE_COST, Recipe, RecipeFormatError, RecipeOutcome,
                      cost_from_json, cost_to_json, evaluate, parse_recipe,
                      recipe_from_json, recipe_to_json, recipe_to_text)
from .analyzer import ALLOWED_VALUES, SETTING_FIELDS

EXIT_OK = 0
EXIT_USER = 2
EXIT_INTERNAL = 3

USER_ERRORS = (ParseError, RecipeFormatError, PosetError, ValueError,
               KeyError, GenerationError, SpaceCapError, FileNotFoundError)


class CliError(ValueError):
    pass


@dataclass
class RunReport:
    command: str
    program: str
    mode: str
    seed: int | None = None
    recipes: dict = field(default_factory=dict)   # name -> recipe json list
    outcomes: dict = field(default_factory=dict)  # name -> outcome dict
    trace_summary: dict | None = None
    extra: dict = field(default_factory=dict)

    def to_json_dict(self) -> dict:
        return {
            "command": self.command,
            "program": self.program,
            "mode": self.mode,
            "seed": self.seed,
            "recipes": self.recipes,
            "outcomes": self.outcomes,
            "trace_summary": self.trace_summary,
            "extra": self.extra,
        }

    @staticmethod
    def from_json_dict(data: dict) -> "RunReport":
        return RunReport(command=data["command"], program=data["program"],
                         mode=data["mode"], seed=data["seed"],
                         recipes=data["recipes"], outcomes=data["outcomes"],
                         trace_summary=data["trace_summary"],
                         extra=data["extra"])


def outcome_to_json(outcome: RecipeOutcome) -> dict:
    return {
        "verdicts": {str(a): v for a, v in sorted(outcome.verdicts.items())},
        "w": outcome.w,
        "w_total": outcome.w_total,
        "r": outcome.r,
        "cost": cost_to_json(outcome.cost),
        "per_ingredient": [{"verified": list(ids), "resource": r}
                           for ids, r in outcome.per_ingredient],
    }


def outcome_from_json(data: dict) -> RecipeOutcome:
    return RecipeOutcome(
        verdicts={int(a): v for a, v in data["verdicts"].items()},
        w=data["w"], w_total=data["w_total"], r=data["r"],
        cost=cost_from_json(data["cost"]),
        per_ingredient=tuple((tuple(e["verified"]), e["resource"])
                             for e in data["per_ingredient"]))


# ---------------------------------------------------------------------------
# Shared argument handling
# ---------------------------------------------------------------------------

def _add_budget_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--mode", choices=("wall", "steps"), default="steps")
    p.add_argument("--limit", help="wall budget, e.g. 1s, 500ms, 2m")
    p.add_argument("--steps-limit", type=int, help="abstract-step budget")


def _add_program_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--program", required=True, help=".air program file")
    p.add_argument("--poset", help="poset description file overriding the default")
    p.add_argument("--instrument", action="store_true",
                   help="insert guard assertions before risky operations")
    p.add_argument("--kinds", default="div,overflow,buf,uaf",
                   help="comma list of assertion kinds for --instrument")
    p.add_argument("--bit-width", type=int, default=32)


def _add_tuner_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--algo", choices=("rs", "dars", "sa", "hc"), default="dars")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-len", type=int, default=3)
    p.add_argument("--domain-iters", type=int, default=5)
    p.add_argument("--settings-iters", type=int, default=10)


def parse_wall_limit(text: str) -> float:
    for suffix, scale in (("ms", 1e-3), ("s", 1.0), ("m", 60.0)):
        if text.endswith(suffix):
            return float(text[: -len(suffix)]) * scale
    raise CliError(f"wall limit {text!r} needs a unit suffix (ms, s, or m)")


def make_budget(args) -> ResourceBudget:
    if args.mode == "steps":
        if args.steps_limit is None:
            raise CliError("steps mode requires --steps-limit")
        return ResourceBudget("steps", args.steps_limit)
    if args.limit is None:
        raise CliError("wall mode requires --limit")
    return ResourceBudget("wall", parse_wall_limit(args.limit))


def load_program(args) -> Program:
    text = Path(args.program).read_text()
    program = parse_program(text)
    if args.instrument:
        kinds = set()
        for token in args.kinds.split(","):
            token = token.strip()
            if token not in KIND_TOKENS:
                raise CliError(f"unknown assertion kind {token!r}")
            kinds.add(KIND_TOKENS[token])
        program = instrument(program, kinds, args.bit_width)
    return program


def load_poset(args) -> DomainPoset:
    if getattr(args, "poset", None):
        return parse_poset(Path(args.poset).read_text())
    return default_poset()


def emit_report(report: RunReport, args, table: str) -> None:
    print(table)
    payload = json.dumps(report.to_json_dict(), indent=2, sort_keys=True)
    if getattr(args, "out", None):
        Path(args.out).write_text(payload + "\n")
    else:
        print(payload)


def _fmt_cost(c) -> str:
    if c == INFINITE_COST:
        return "inf"
    return f"{float(c):.6f}"


def _outcome_row(name: str, outcome: RecipeOutcome) -> str:
    verified = outcome.w_total - outcome.w
    return (f"{name:<14} verified {verified:>4}/{outcome.w_total:<4} "
            f"resource {outcome.r:<12} cost {_fmt_cost(outcome.cost)}")


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def _trace_summary(trace, mode: str) -> dict:
    best_iter = 0
    best_cost = None
    total_resource = 0
    for entry in trace:
        if best_cost is None or entry.cost < best_cost:
            best_cost = entry.cost
            best_iter = entry.iteration
    return {"iterations_to_best": best_iter,
            "total_candidates": len(trace),
            "best_cost": cost_to_json(best_cost) if trace else None,
            "mode": mode}


def cmd_tune(args) -> int:
    program = load_program(args)
    poset = load_poset(args)
    budget = make_budget(args)
    cfg = TunerConfig(budget=budget, l_max=args.max_len,
                      i_dom=args.domain_iters, i_set=args.settings_iters,
                      strategy=args.algo, seed=args.seed, poset=poset)
    best, trace = optimize(program, cfg)
    outcome = evaluate(program, best, budget)

    recipe_path = args.recipe or (args.program + ".recipe")
    Path(recipe_path).write_text(recipe_to_text(best))

    report = RunReport(
        command="tune", program=args.program, mode=args.mode, seed=args.seed,
        recipes={"tuned": recipe_to_json(best)},
        outcomes={"tuned": outcome_to_json(outcome)},
        trace_summary=_trace_summary(trace, args.mode),
        extra={"algo": args.algo, "recipe_file": str(recipe_path),
               "iterations": [
                   {"iteration": e.iteration, "phase": e.phase,
                    "domains": [d.token for d in e.recipe.domains()],
                    "cost": cost_to_json(e.cost), "accepted": e.accepted,
                    "best_cost": cost_to_json(e.best_cost),
                    "restart": e.restart}
                   for e in trace]})
    table = "\n".join([
        f"tuned recipe ({args.algo}, seed {args.seed}) -> {recipe_path}",
        *(f"  [{i}] {ing.domain.token} {ing.settings}"
          for i, ing in enumerate(best.ingredients)),
        _outcome_row("tuned", outcome),
    ])
    emit_report(report, args, table)
    return EXIT_OK


def cmd_analyze(args) -> int:
    program = load_program(args)
    budget = make_budget(args)
    recipe = parse_recipe(Path(args.recipe).read_text())
    for ing in recipe.ingredients:
        get_domain(ing.domain)
    outcome = evaluate(program, recipe, budget)
    report = RunReport(
        command="analyze", program=args.program, mode=args.mode,
        recipes={"recipe": recipe_to_json(recipe)},
        outcomes={"recipe": outcome_to_json(outcome)})
    lines = [_outcome_row("recipe", outcome), "verdicts:"]
    for aid, verdict in sorted(outcome.verdicts.items()):
        lines.append(f"  #{aid}: {verdict}")
    emit_report(report, args, "\n".join(lines))
    return EXIT_OK


def default_recipe() -> Recipe:
    """The expert default: reduced product of booleans and zones with the
    stock settings."""
    return Recipe((Ingredient(DomainId.PROD_BOOL_ZONES, DEFAULT_SETTINGS),))


def cmd_compare(args) -> int:
    program = load_program(args)
    poset = load_poset(args)
    budget = make_budget(args)

    def_outcome = evaluate(program, default_recipe(), budget)
    cfg = TunerConfig(budget=budget, l_max=args.max_len,
                      i_dom=args.domain_iters, i_set=args.settings_iters,
                      strategy=args.algo, seed=args.seed, poset=poset)
    tuned, trace = optimize(program, cfg)
    tuned_outcome = evaluate(program, tuned, budget)
    precise = most_precise_recipe(poset)
    precise_outcome = evaluate(program, precise, budget)

    def_set = def_outcome.verified()
    tuned_set = tuned_outcome.verified()
    partition = {
        "both": sorted(def_set & tuned_set),
        "only_tuned": sorted(tuned_set - def_set),
        "only_default": sorted(def_set - tuned_set),
    }
    report = RunReport(
        command="compare", program=args.program, mode=args.mode, seed=args.seed,
        recipes={"default": recipe_to_json(default_recipe()),
                 "tuned": recipe_to_json(tuned),
                 "most_precise": recipe_to_json(precise)},
        outcomes={"default": outcome_to_json(def_outcome),
                  "tuned": outcome_to_json(tuned_outcome),
                  "most_precise": outcome_to_json(precise_outcome)},
        trace_summary=_trace_summary(trace, args.mode),
        extra={"algo": args.algo, "partition": partition})
    table = "\n".join([
        _outcome_row("default", def_outcome),
        _outcome_row("tuned", tuned_outcome),
        _outcome_row("most_precise", precise_outcome),
        f"verified by both: {len(partition['both'])}, "
        f"only tuned: {len(partition['only_tuned'])}, "
        f"only default: {len(partition['only_default'])}",
    ])
    emit_report(report, args, table)
    return EXIT_OK


def _parse_vary(items) -> dict:
    values = dict(ALLOWED_VALUES)
    for item in items or ():
        name, _, raw = item.partition("=")
        if name not in SETTING_FIELDS or not raw:
            raise CliError(f"--vary expects <setting>=v1|v2, got {item!r}")
        parsed = []
        for tok in raw.split("|"):
            if name in ("backward", "smashing"):
                if tok not in ("on", "off"):
                    raise CliError(f"{name} values must be on/off")
                parsed.append(tok == "on")
            else:
                parsed.append(int(tok))
        values[name] = tuple(parsed)
    return values


def cmd_oracle(args) -> int:
    program = load_program(args)
    poset = load_poset(args)
    budget = make_budget(args)
    if budget.mode != "steps":
        raise CliError("the exhaustive oracle runs in steps mode only")

    domains = tuple(domain_from_token(t.strip())
                    for t in args.domains.split(","))
    setting_values = _parse_vary(args.vary)
    if not args.full_settings and not args.vary:
        setting_values = {name: (getattr(DEFAULT_SETTINGS, name),)
                          for name in SETTING_FIELDS}
    space = SearchSpace(domains=domains, setting_values=setting_values)
    space.validate(poset)
    best, best_cost, size = enumerate_exhaustive(
        program, space, poset, args.oracle_max_len, budget, cap=args.cap)

    extra = {
        "space_size": size,
        "optimum_cost": cost_to_json(best_cost),
        "coverage_note": ("tuner optimality is not guaranteed: candidates are "
                          "sampled with replacement"),
    }
    recipes = {"optimum": recipe_to_json(best)}
    outcomes = {}
    table_lines = [f"space of {size} recipes, optimum cost {_fmt_cost(best_cost)}"]
    if args.with_tuner:
        cfg = TunerConfig(budget=budget, l_max=args.oracle_max_len,
                          i_dom=args.domain_iters, i_set=args.settings_iters,
                          strategy=args.algo, seed=args.seed, poset=poset,
                          space=space)
        tuned, trace = optimize(program, cfg)
        tuned_cost = evaluate(program, tuned, budget).cost
        gap = (None if best_cost == INFINITE_COST or tuned_cost == INFINITE_COST
               else cost_to_json(tuned_cost - best_cost))
        extra["tuner"] = {"algo": args.algo, "seed": args.seed,
                          "cost": cost_to_json(tuned_cost), "gap": gap,
                          "candidates": len(trace)}
        recipes["tuned"] = recipe_to_json(tuned)
        table_lines.append(
            f"tuner ({args.algo}, seed {args.seed}) cost {_fmt_cost(tuned_cost)}"
            f" gap {gap if gap is not None else 'n/a'}")
    report = RunReport(command="oracle", program=args.program, mode=args.mode,
                       seed=args.seed, recipes=recipes, outcomes=outcomes,
                       extra=extra)
    emit_report(report, args, "\n".join(table_lines))
    return EXIT_OK


def cmd_replay(args) -> int:
    program = load_program(args)
    poset = load_poset(args)
    budget = make_budget(args)
    old_recipe = parse_recipe(Path(args.recipe).read_text())
    old_outcome = evaluate(program, old_recipe, budget)

    recipes = {"old": recipe_to_json(old_recipe)}
    outcomes = {"old": outcome_to_json(old_outcome)}
    extra: dict = {}
    table_lines = [_outcome_row("old_recipe", old_outcome)]
    trace_summary = None
    if args.retune:
        cfg = TunerConfig(budget=budget, l_max=args.max_len,
                          i_dom=args.domain_iters, i_set=args.settings_iters,
                          strategy=args.algo, seed=args.seed, poset=poset)
        new_recipe, trace = optimize(program, cfg)
        new_outcome = evaluate(program, new_recipe, budget)
        recipes["new"] = recipe_to_json(new_recipe)
        outcomes["new"] = outcome_to_json(new_outcome)
        trace_summary = _trace_summary(trace, args.mode)
        old_verified = old_outcome.w_total - old_outcome.w
        new_verified = new_outcome.w_total - new_outcome.w
        diff = old_verified - new_verified
        # Equal when within one assertion or 1% of the re-tuned count.
        tolerance = max(1, new_verified // 100)
        if abs(diff) <= tolerance:
            classification = "equal"
        elif diff > 0:
            classification = "positive"
        else:
            classification = "negative"
        extra["classification"] = classification
        extra["diff"] = diff
        extra["tolerance"] = tolerance
        table_lines.append(_outcome_row("retuned", new_outcome))
        table_lines.append(f"classification: {classification} (diff {diff})")
    report = RunReport(command="replay", program=args.program, mode=args.mode,
                       seed=args.seed, recipes=recipes, outcomes=outcomes,
                       trace_summary=trace_summary, extra=extra)
    emit_report(report, args, "\n".join(table_lines))
    return EXIT_OK


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="airtune",
        description="Tailor an abstract interpreter's recipe to a program "
                    "and resource budget.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("tune", help="search for a low-cost recipe")
    _add_program_args(p)
    _add_budget_args(p)
    _add_tuner_args(p)
    p.add_argument("--recipe", help="output recipe file (default <program>.recipe)")
    p.add_argument("--out", help="write the JSON report here")
    p.set_defaults(func=cmd_tune)

    p = sub.add_parser("analyze", help="evaluate one recipe")
    _add_program_args(p)
    _add_budget_args(p)
    p.add_argument("--recipe", required=True, help="recipe file to run")
    p.add_argument("--out")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("compare", help="default vs tuned vs most precise")
    _add_program_args(p)
    _add_budget_args(p)
    _add_tuner_args(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("oracle", help="exhaustively evaluate a restricted space")
    _add_program_args(p)
    _add_budget_args(p)
    _add_tuner_args(p)
    p.add_argument("--domains", required=True, help="comma list of domains")
    p.add_argument("--oracle-max-len", type=int, default=2)
    p.add_argument("--vary", action="append",
                   help="setting=v1|v2 to open up a setting (repeatable)")
    p.add_argument("--full-settings", action="store_true",
                   help="use the full Table-style setting sets")
    p.add_argument("--cap", type=int, default=5000)
    p.add_argument("--with-tuner", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("replay", help="evaluate an old recipe on a new version")
    _add_program_args(p)
    _add_budget_args(p)
    _add_tuner_args(p)
    p.add_argument("--recipe", required=True, help="previously tuned recipe")
    p.add_argument("--retune", action="store_true",
                   help="also tune a fresh recipe and classify the difference")
    p.add_argument("--out")
    p.set_defaults(func=cmd_replay)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UnimplementedDomainError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_USER
    except USER_ERRORS as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_USER
    except Exception as err:  # internal failure contract
        print(f"internal error: {type(err).__name__}: {err}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
