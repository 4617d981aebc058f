"""Seeded random states, statements, and concrete mini-semantics shared by
the property tests and the acceptance suite.

States are produced by applying random transfers to top, so every domain
sees representable, reachable shapes.  The concrete oracle enumerates integer
points inside a small box and replays statement semantics directly on them,
independent of the abstract transfer code under test.
"""

from __future__ import annotations

import itertools
import random

from airtune.domains import BOTTOM, DomainId
from airtune.domains.api import get_domain
from airtune.ir import (Assign, Assume, BinOp, BoolAssign, BoolLit, BoolRef,
                        Cmp, Havoc, NotE, eval_cond, lin, lin_const, lin_var,
                        tdiv, tmod)

NUM_VARS = ("x", "y")
BOOL_VARS = ("p", "q")
LO, HI = -6, 6

NUMERIC_DOMAINS = (DomainId.INTERVALS, DomainId.DISINT, DomainId.RIC,
                   DomainId.ZONES, DomainId.OCTAGONS)
ALL_DOMAINS = NUMERIC_DOMAINS + (DomainId.BOOL, DomainId.PROD_BOOL_ZONES)


def domain_vars(domain: DomainId):
    if domain is DomainId.BOOL:
        return (), BOOL_VARS
    if domain is DomainId.PROD_BOOL_ZONES:
        return NUM_VARS, BOOL_VARS
    return NUM_VARS, ()


def random_linexpr(rng: random.Random, vars=NUM_VARS):
    expr = lin_const(rng.randint(-3, 3))
    for v in vars:
        if rng.random() < 0.6:
            expr = expr.add(lin_var(v).scale(rng.choice((-2, -1, 1, 2))))
    return expr


def random_cmp(rng: random.Random, vars=NUM_VARS):
    return Cmp(random_linexpr(rng, vars), rng.choice(("<", "<=", ">", ">=", "==", "!=")),
               random_linexpr(rng, vars))


def random_bool_cond(rng: random.Random, numeric=False):
    kind = rng.randrange(4 if numeric else 3)
    if kind == 0:
        return BoolRef(rng.choice(BOOL_VARS))
    if kind == 1:
        return NotE(BoolRef(rng.choice(BOOL_VARS)))
    if kind == 2:
        return BoolLit(rng.random() < 0.5)
    return random_cmp(rng)


def random_stmt(rng: random.Random, domain: DomainId):
    numeric, bools = domain_vars(domain)
    choices = []
    if numeric:
        choices += ["assign", "binop", "havoc", "assume"]
    if bools:
        choices += ["boolassign", "bool_assume"]
    kind = rng.choice(choices)
    if kind == "assign":
        return Assign(rng.choice(numeric), random_linexpr(rng, numeric))
    if kind == "binop":
        op = rng.choice(("+", "-", "*", "/", "%"))
        return BinOp(rng.choice(numeric), random_linexpr(rng, numeric), op,
                     random_linexpr(rng, numeric))
    if kind == "havoc":
        lo = rng.randint(LO, HI)
        hi = rng.randint(lo, HI)
        return Havoc(rng.choice(numeric), lo, hi)
    if kind == "assume":
        return Assume(random_cmp(rng, numeric))
    if kind == "boolassign":
        return BoolAssign(rng.choice(bools), random_bool_cond(rng, numeric=bool(numeric)))
    return Assume(random_bool_cond(rng))


def random_state(domain: DomainId, rng: random.Random, ops: int = 3):
    dom = get_domain(domain)
    numeric, bools = domain_vars(domain)
    s = dom.make_top(numeric, bools)
    for v in numeric:
        lo = rng.randint(LO, HI)
        s = dom.transfer(s, Havoc(v, lo, rng.randint(lo, HI)))
    for _ in range(ops):
        s = dom.transfer(s, random_stmt(rng, domain))
        if s is BOTTOM:
            break
    return s


def enumerate_points(domain: DomainId, lo=LO, hi=HI):
    """Every assignment of the domain's variables within the box."""
    numeric, bools = domain_vars(domain)
    num_ranges = [range(lo, hi + 1)] * len(numeric)
    bool_ranges = [(False, True)] * len(bools)
    for nums in itertools.product(*num_ranges):
        base = dict(zip(numeric, nums))
        for bits in itertools.product(*bool_ranges):
            env = dict(base)
            env.update(zip(bools, bits))
            yield env


def gamma_points(domain: DomainId, state, lo=LO, hi=HI):
    dom = get_domain(domain)
    if state is BOTTOM:
        return []
    return [env for env in enumerate_points(domain, lo, hi)
            if dom.contains_point(state, env)]


def concrete_post(stmt, env: dict):
    """All successor stores of one concrete store under one statement."""
    kind = type(stmt)
    if kind is Assign:
        out = dict(env)
        out[stmt.var] = stmt.expr.eval(env)
        return [out]
    if kind is BinOp:
        a, b = stmt.lhs.eval(env), stmt.rhs.eval(env)
        if stmt.op in ("/", "%") and b == 0:
            return []  # the run halts: no successor store
        value = {"+": lambda: a + b, "-": lambda: a - b, "*": lambda: a * b,
                 "/": lambda: tdiv(a, b), "%": lambda: tmod(a, b)}[stmt.op]()
        out = dict(env)
        out[stmt.var] = value
        return [out]
    if kind is Havoc:
        outs = []
        for value in range(stmt.lo, stmt.hi + 1):
            out = dict(env)
            out[stmt.var] = value
            outs.append(out)
        return outs
    if kind is Assume:
        try:
            keep = eval_cond(stmt.cond, env)
        except ZeroDivisionError:
            return []
        return [dict(env)] if keep else []
    if kind is BoolAssign:
        out = dict(env)
        try:
            out[stmt.var] = eval_cond(stmt.expr, env)
        except ZeroDivisionError:
            return []
        return [out]
    raise TypeError(stmt)


def domain_widen_step_bound(domain: DomainId, nvars: int, nthresholds: int) -> int:
    """The stabilization bound the chain tests assert against."""
    if domain is DomainId.ZONES:
        return (nvars + 1) ** 2 * (nthresholds + 2)
    if domain is DomainId.OCTAGONS:
        return (2 * nvars) ** 2 * (nthresholds + 2)
    if domain is DomainId.BOOL:
        return 2 * len(BOOL_VARS) * (nthresholds + 2)
    if domain is DomainId.PROD_BOOL_ZONES:
        return ((nvars + 1) ** 2 + 2 * len(BOOL_VARS) + len(BOOL_VARS)) \
            * (nthresholds + 2)
    return 2 * nvars * (nthresholds + 2)
