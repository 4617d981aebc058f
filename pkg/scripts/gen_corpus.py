#!/usr/bin/env python3
"""Regenerate the bundled .air corpus.

Each program is a handful of small functions (the analysis is
intra-procedural, so functions are the unit of work): four assertion-kind
sections (division, overflow, array bounds, allocation status) plus one
themed function that favors a particular abstract domain, so that recipes
genuinely differ in what they prove.  The generator is deterministic: file
contents depend only on the seeds below.

Run from the repository root:  python scripts/gen_corpus.py
"""

from __future__ import annotations

import random
import sys
from pathlib import Path

OUT_DIR = Path(__file__).resolve().parent.parent / "src" / "airtune" / "corpus"


class Builder:
    """Accumulates functions; assertion ids are unique per program."""

    def __init__(self, seed: int):
        self.rng = random.Random(seed)
        self.aid = 0
        self.tmp = 0
        self.functions: list[str] = []
        self._blocks: list[str] = []

    def nid(self) -> int:
        self.aid += 1
        return self.aid

    def fresh(self, prefix: str) -> str:
        self.tmp += 1
        return f"{prefix}{self.tmp}"

    def block(self, bid: str, *stmts: str) -> None:
        body = "\n".join(f"    {s}" for s in stmts)
        self._blocks.append(f"  block {bid} {{\n{body}\n  }}")

    def end_function(self, name: str) -> None:
        self.functions.append(
            f"fn {name} {{\n" + "\n".join(self._blocks) + "\n}\n")
        self._blocks = []

    def emit(self) -> str:
        return "\n".join(self.functions)


def div_section(b: Builder, include_zero: bool) -> None:
    d, q, r, s = (b.fresh(p) for p in "dqrs")
    lo = 0 if include_zero else 1
    use, skip, joined = b.fresh("bb"), b.fresh("bb"), b.fresh("bb")
    b.block("entry",
            f"{d} = havoc({lo}, {lo + 2});",
            f"br ({d} != 0) then: {use} else: {skip};")
    b.block(use,
            f"assert div: {d} != 0 #{b.nid()};",
            f"{q} = 60 / {d};",
            f"goto {joined};")
    b.block(skip, f"{q} = 0;", f"goto {joined};")
    b.block(joined,
            f"assert div: {d} != 0 #{b.nid()};",
            f"{r} = 7 % {d};" if include_zero else f"{r} = 7 / {d};",
            f"assert div: {d} + 5 != 0 #{b.nid()};",
            f"{s} = 60 / ({d} + 5);",
            f"assert overflow: 0 <= {q} && {q} <= 60 #{b.nid()};",
            "return;")
    b.end_function(b.fresh("div_checks_"))


def overflow_section(b: Builder, blow_up: bool) -> None:
    a, s, p = (b.fresh(x) for x in "asp")
    big = 90 if blow_up else 9
    b.block("entry",
            f"{a} = havoc(-3, 3);",
            f"{s} = {a} + {big};",
            f"assert overflow: -128 <= {a} + {big} && {a} + {big} <= 127 #{b.nid()};",
            f"{p} = {s} * {s};",
            f"assert overflow: -128 <= {s} * {s} && {s} * {s} <= 127 #{b.nid()};",
            f"assert overflow: -128 <= {a} - {big} && {a} - {big} <= 127 #{b.nid()};",
            "return;")
    b.end_function(b.fresh("overflow_checks_"))


def buf_section(b: Builder, off_by_one: bool) -> None:
    arr, i, x, y = b.fresh("arr"), b.fresh("i"), b.fresh("x"), b.fresh("y")
    length = 4
    hi = length if off_by_one else length - 1
    b.block("entry",
            f"len({arr}) = {length};",
            f"{i} = havoc(0, {hi});",
            f"assert buf: 0 <= {i} && {i} < len({arr}) #{b.nid()};",
            f"{arr}[{i}] = {i};",
            f"{x} = {arr}[0];",
            f"assert buf: 0 <= 0 && 0 < len({arr}) #{b.nid()};",
            f"assert buf: 0 <= {i} - 1 && {i} - 1 < len({arr}) #{b.nid()};",
            f"{y} = {arr}[{i} - 1];",
            f"assert overflow: 0 <= {x} && {x} <= {hi} #{b.nid()};",
            "return;")
    b.end_function(b.fresh("bounds_checks_"))


def uaf_section(b: Builder, stale: bool) -> None:
    h, g, c = b.fresh("h"), b.fresh("g"), b.fresh("c")
    freeing, keep, joined = b.fresh("bb"), b.fresh("bb"), b.fresh("bb")
    b.block("entry",
            f"{c} = havoc(0, 1);",
            f"alloc({h});",
            f"assert uaf: status({h}) == 1 #{b.nid()};",
            f"deref({h});",
            f"br ({c} == 0) then: {freeing} else: {keep};")
    if stale:
        b.block(freeing,
                f"free({h});",
                f"assert uaf: status({h}) == 1 #{b.nid()};",
                f"deref({h});",
                f"goto {joined};")
    else:
        b.block(freeing,
                f"free({h});",
                f"alloc({h});",
                f"assert uaf: status({h}) == 1 #{b.nid()};",
                f"deref({h});",
                f"goto {joined};")
    b.block(keep,
            f"assert uaf: status({h}) == 1 #{b.nid()};",
            f"deref({h});",
            f"goto {joined};")
    b.block(joined,
            f"alloc({g});",
            f"assert uaf: status({g}) == 1 #{b.nid()};",
            f"deref({g});",
            f"free({g});",
            "return;")
    b.end_function(b.fresh("alloc_checks_"))


def loop_section(b: Builder, bound: int, with_acc: bool) -> None:
    i = b.fresh("i")
    head, body, done = b.fresh("bb"), b.fresh("bb"), b.fresh("bb")
    if with_acc:
        # The accumulator walks in lockstep with the counter, so the exit
        # bound needs the relational domains.
        acc = b.fresh("acc")
        b.block("entry", f"{i} = 0;", f"{acc} = 0;", f"goto {head};")
        b.block(head, f"br ({i} < {bound}) then: {body} else: {done};")
        b.block(body,
                f"assert overflow: 0 <= {i} && {i} < {bound} #{b.nid()};",
                f"assert overflow: {acc} < {bound} #{b.nid()};",
                f"{i} = {i} + 1;",
                f"{acc} = {acc} + 1;",
                f"goto {head};")
        b.block(done,
                f"assert overflow: {i} == {bound} #{b.nid()};",
                f"assert overflow: {acc} == {bound} #{b.nid()};",
                "return;")
    else:
        b.block("entry", f"{i} = 0;", f"goto {head};")
        b.block(head, f"br ({i} < {bound}) then: {body} else: {done};")
        b.block(body,
                f"assert overflow: 0 <= {i} && {i} < {bound} #{b.nid()};",
                f"{i} = {i} + 1;",
                f"goto {head};")
        b.block(done,
                f"assert overflow: {i} == {bound} #{b.nid()};",
                "return;")
    b.end_function(b.fresh("loop_exit_"))


def neq_loop_section(b: Builder, bound: int) -> None:
    """Disequality-guarded loop: the in-body bound is provable only with
    enough widening delay or a threshold at the bound; narrowing alone never
    recovers it."""
    i = b.fresh("i")
    head, body, done = b.fresh("bb"), b.fresh("bb"), b.fresh("bb")
    b.block("entry", f"{i} = 0;", f"goto {head};")
    b.block(head, f"br ({i} != {bound}) then: {body} else: {done};")
    b.block(body,
            f"assert overflow: {i} < {bound} #{b.nid()};",
            f"assert overflow: 0 <= {i} #{b.nid()};",
            f"{i} = {i} + 1;",
            f"goto {head};")
    b.block(done,
            f"assert overflow: {i} == {bound} #{b.nid()};",
            "return;")
    b.end_function(b.fresh("ratchet_"))


def disint_section(b: Builder, k: int) -> None:
    y, c = b.fresh("y"), b.fresh("c")
    lowb, highb, joined = b.fresh("bb"), b.fresh("bb"), b.fresh("bb")
    mid = k // 2
    b.block("entry",
            f"{c} = havoc(0, 1);",
            f"br ({c} == 0) then: {lowb} else: {highb};")
    b.block(lowb, f"{y} = 0;", f"goto {joined};")
    b.block(highb, f"{y} = {k};", f"goto {joined};")
    b.block(joined,
            f"assert overflow: {y} != {mid} #{b.nid()};",
            f"assert overflow: {y} != {mid + 1} #{b.nid()};",
            f"assert overflow: 0 <= {y} && {y} <= {k} #{b.nid()};",
            f"assert overflow: {y} != 0 #{b.nid()};",
            "return;")
    b.end_function(b.fresh("gap_values_"))


def ric_section(b: Builder, stride: int, reps: int) -> None:
    x, n = b.fresh("x"), b.fresh("n")
    head, body, done = b.fresh("bb"), b.fresh("bb"), b.fresh("bb")
    b.block("entry",
            f"{x} = 1;",
            f"{n} = havoc(0, {reps});",
            f"goto {head};")
    b.block(head, f"br ({n} > 0) then: {body} else: {done};")
    b.block(body,
            f"{x} = {x} + {stride};",
            f"{n} = {n} - 1;",
            f"goto {head};")
    b.block(done,
            f"assert overflow: {x} != 2 #{b.nid()};",
            f"assert overflow: {x} != {stride + 2} #{b.nid()};",
            f"assert overflow: {x} != {1 + stride} #{b.nid()};",
            f"assert overflow: 1 <= {x} #{b.nid()};",
            "return;")
    b.end_function(b.fresh("stride_walk_"))


def zones_section(b: Builder, offset: int) -> None:
    x, y = b.fresh("x"), b.fresh("y")
    bump, stay, joined = b.fresh("bb"), b.fresh("bb"), b.fresh("bb")
    b.block("entry",
            f"{x} = havoc(0, 8);",
            f"{y} = {x} + {offset};",
            f"br ({x} < 4) then: {bump} else: {stay};")
    b.block(bump, f"{x} = {x} + 1;", f"{y} = {y} + 1;", f"goto {joined};")
    b.block(stay, f"goto {joined};")
    b.block(joined,
            f"assert overflow: {y} - {x} == {offset} #{b.nid()};",
            f"assert overflow: {x} <= {y} #{b.nid()};",
            f"assert overflow: {y} - {x} == {offset + 1} #{b.nid()};",
            "return;")
    b.end_function(b.fresh("offset_pair_"))


def oct_section(b: Builder, total: int) -> None:
    i, j = b.fresh("i"), b.fresh("j")
    head, body, done = b.fresh("bb"), b.fresh("bb"), b.fresh("bb")
    b.block("entry", f"{i} = 0;", f"{j} = {total};", f"goto {head};")
    b.block(head, f"br ({i} < {total}) then: {body} else: {done};")
    b.block(body,
            f"{i} = {i} + 1;",
            f"{j} = {j} - 1;",
            f"goto {head};")
    b.block(done,
            f"assert overflow: {i} + {j} == {total} #{b.nid()};",
            f"assert overflow: {i} + {j} <= {total} #{b.nid()};",
            "return;")
    b.end_function(b.fresh("seesaw_"))


def prod_section(b: Builder, cap: int) -> None:
    x, flag, ok = b.fresh("x"), b.fresh("fl"), b.fresh("ok")
    yes, no, joined = b.fresh("bb"), b.fresh("bb"), b.fresh("bb")
    b.block("entry",
            f"{x} = havoc(0, {2 * cap});",
            f"{flag} = {x} <= {cap};",
            f"{ok} = true;",
            f"br ({flag}) then: {yes} else: {no};")
    b.block(yes,
            f"assert overflow: {x} <= {cap} #{b.nid()};",
            f"goto {joined};")
    b.block(no,
            f"{x} = {cap};",
            f"goto {joined};")
    b.block(joined,
            f"assert overflow: {x} <= {cap} #{b.nid()};",
            f"assert overflow: {ok} #{b.nid()};",
            "return;")
    b.end_function(b.fresh("flag_gate_"))


THEMES = {
    "disint": lambda b, rng: disint_section(b, rng.choice((10, 12, 20))),
    "ric": lambda b, rng: ric_section(b, 4, rng.choice((3, 4))),
    "zones": lambda b, rng: zones_section(b, rng.choice((3, 5))),
    "oct": lambda b, rng: oct_section(b, rng.choice((6, 8))),
    "prod": lambda b, rng: prod_section(b, rng.choice((5, 7))),
    "loop": lambda b, rng: loop_section(b, rng.choice((8, 10)), True),
    "ratchet": lambda b, rng: neq_loop_section(b, rng.choice((11, 12, 13))),
}


def standard_program(seed: int, theme: str) -> str:
    b = Builder(seed)
    rng = b.rng
    div_section(b, include_zero=rng.random() < 0.6)
    overflow_section(b, blow_up=rng.random() < 0.5)
    buf_section(b, off_by_one=rng.random() < 0.5)
    uaf_section(b, stale=rng.random() < 0.6)
    THEMES[theme](b, rng)
    loop_section(b, rng.choice((6, 8, 10)), with_acc=rng.random() < 0.4)
    return b.emit()


def showcase_disint() -> str:
    b = Builder(7)
    disint_section(b, 10)
    disint_section(b, 14)
    ric_section(b, 4, 3)
    prod_section(b, 5)
    div_section(b, include_zero=True)
    uaf_section(b, stale=True)
    buf_section(b, off_by_one=False)
    return b.emit()


def showcase_budget() -> str:
    """Loops and arrays everywhere: expensive for maximal settings."""
    b = Builder(11)
    loop_section(b, 10, with_acc=True)
    loop_section(b, 8, with_acc=True)
    oct_section(b, 8)
    zones_section(b, 3)
    buf_section(b, off_by_one=True)
    uaf_section(b, stale=True)
    div_section(b, include_zero=True)
    overflow_section(b, blow_up=True)
    return b.emit()


def replay_pair_equal() -> tuple[str, str]:
    def build(extra: bool) -> str:
        b = Builder(23)
        loop_section(b, 8, with_acc=False)
        zones_section(b, 3)
        div_section(b, include_zero=False)
        uaf_section(b, stale=False)
        buf_section(b, off_by_one=False)
        if extra:
            w = b.fresh("w")
            b.block("entry",
                    f"{w} = 2;",
                    f"assert overflow: {w} == 2 #{b.nid()};",
                    "return;")
            b.end_function("added_check")
        return b.emit()

    return build(False), build(True)


def replay_pair_negative() -> tuple[str, str]:
    def build(hard: bool) -> str:
        b = Builder(29)
        loop_section(b, 6, with_acc=False)
        div_section(b, include_zero=False)
        buf_section(b, off_by_one=False)
        uaf_section(b, stale=False)
        if hard:
            # Disequality-guarded loops defeat low widening settings.
            neq_loop_section(b, 12)
            neq_loop_section(b, 14)
            neq_loop_section(b, 13)
        return b.emit()

    return build(False), build(True)


DEFAULT_RECIPE = """\
[ingredient]
domain = prod(bool,zones)
delay_widen = 1
narrow_iters = 2
widen_thresholds = 0
backward = off
smashing = on
"""

REPLAY_OLD_RECIPE = """\
[ingredient]
domain = intervals
delay_widen = 1
narrow_iters = 2
widen_thresholds = 0
backward = off
smashing = on
"""


def main() -> int:
    OUT_DIR.mkdir(parents=True, exist_ok=True)
    files: dict[str, str] = {}

    themes = ["disint", "ric", "zones", "oct", "prod", "loop", "ratchet"]
    seed = 100
    for round_idx in range(3):
        for theme in themes:
            files[f"{theme}_{round_idx:02d}.air"] = standard_program(seed, theme)
            seed += 17

    files["showcase_disint.air"] = showcase_disint()
    files["showcase_budget.air"] = showcase_budget()

    v1, v2 = replay_pair_equal()
    files["replay_equal_v1.air"] = v1
    files["replay_equal_v2.air"] = v2
    v1, v2 = replay_pair_negative()
    files["replay_harder_v1.air"] = v1
    files["replay_harder_v2.air"] = v2

    files["default.recipe"] = DEFAULT_RECIPE
    files["replay_old.recipe"] = REPLAY_OLD_RECIPE

    for fname, text in sorted(files.items()):
        (OUT_DIR / fname).write_text(text)
    print(f"wrote {len(files)} files to {OUT_DIR}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
