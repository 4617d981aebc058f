"""Core IR: CFG programs over mathematical integers, booleans, arrays, and region handles.

A program is a set of functions; a function is a map from block ids to basic
blocks, each ending in exactly one terminator.  Linear expressions are kept
symbolic (constant + weighted variable sum); the three genuinely nonlinear
operators (``*`` of two non-constant operands, ``/``, ``%``) appear only as
dedicated binop statements or as a single nonlinear term inside a comparison.

Division and modulo truncate toward zero (C semantics); integers are unbounded,
overflow is expressed purely through assertions.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator, Union


def len_var(array: str) -> str:
    return f"len({array})"


def status_var(handle: str) -> str:
    return f"status({handle})"


def cell_var(array: str) -> str:
    """Name of the summary cell a smashed array collapses to."""
    return f"cell({array})"


def tdiv(a: int, b: int) -> int:
    """Integer division truncating toward zero."""
    q = abs(a) // abs(b)
    return q if (a >= 0) == (b >= 0) else -q


def tmod(a: int, b: int) -> int:
    """Remainder paired with tdiv: sign follows the dividend."""
    return a - b * tdiv(a, b)


# ---------------------------------------------------------------------------
# Expressions
# ---------------------------------------------------------------------------

@dataclass(frozen=True, slots=True)
class LinExpr:
    """c0 + sum(ci * vi) with integer coefficients; terms sorted by variable."""

    const: int = 0
    terms: tuple[tuple[str, int], ...] = ()

    def is_const(self) -> bool:
        return not self.terms

    def variables(self) -> tuple[str, ...]:
        return tuple(v for v, _ in self.terms)

    def eval(self, env: dict[str, int]) -> int:
        return self.const + sum(c * env[v] for v, c in self.terms)

    def add(self, other: "LinExpr") -> "LinExpr":
        acc = dict(self.terms)
        for v, c in other.terms:
            acc[v] = acc.get(v, 0) + c
        return lin(self.const + other.const, acc)

    def sub(self, other: "LinExpr") -> "LinExpr":
        return self.add(other.scale(-1))

    def scale(self, k: int) -> "LinExpr":
        if k == 0:
            return LinExpr(0, ())
        return lin(self.const * k, {v: c * k for v, c in self.terms})

    def __str__(self) -> str:
        parts = []
        for v, c in self.terms:
            if c == 1:
                parts.append(v if not parts else f"+ {v}")
            elif c == -1:
                parts.append(f"-{v}" if not parts else f"- {v}")
            elif c < 0:
                parts.append(f"-{-c}*{v}" if not parts else f"- {-c}*{v}")
            else:
                parts.append(f"{c}*{v}" if not parts else f"+ {c}*{v}")
        if self.const or not parts:
            parts.append(str(self.const) if not parts else
                         (f"+ {self.const}" if self.const >= 0 else f"- {-self.const}"))
        return " ".join(parts)


def lin(const: int = 0, terms: Union[dict, None] = None) -> LinExpr:
    """Build a normalized linear expression (zero coefficients dropped)."""
    if not terms:
        return LinExpr(const, ())
    items = tuple(sorted((v, c) for v, c in terms.items() if c != 0))
    return LinExpr(const, items)


def lin_var(name: str) -> LinExpr:
    return LinExpr(0, ((name, 1),))


def lin_const(c: int) -> LinExpr:
    return LinExpr(c, ())


NONLINEAR_OPS = ("*", "/", "%")
BINOPS = ("+", "-", "*", "/", "%")


@dataclass(frozen=True, slots=True)
class BinExpr:
    """A single nonlinear operation over linear operands, used in conditions."""

    lhs: LinExpr
    op: str  # one of NONLINEAR_OPS
    rhs: LinExpr

    def variables(self) -> tuple[str, ...]:
        return self.lhs.variables() + self.rhs.variables()

    def eval(self, env: dict[str, int]) -> int:
        a, b = self.lhs.eval(env), self.rhs.eval(env)
        if self.op == "*":
            return a * b
        if b == 0:
            raise ZeroDivisionError
        return tdiv(a, b) if self.op == "/" else tmod(a, b)

    def __str__(self) -> str:
        return f"({self.lhs}) {self.op} ({self.rhs})"


ArithExpr = Union[LinExpr, BinExpr]


# ---------------------------------------------------------------------------
# Conditions
# ---------------------------------------------------------------------------

CMP_OPS = ("<", "<=", ">", ">=", "==", "!=")


@dataclass(frozen=True, slots=True)
class Cmp:
    lhs: ArithExpr
    op: str
    rhs: ArithExpr

    def __str__(self) -> str:
        return f"{self.lhs} {self.op} {self.rhs}"


@dataclass(frozen=True, slots=True)
class BoolLit:
    value: bool

    def __str__(self) -> str:
        return "true" if self.value else "false"


@dataclass(frozen=True, slots=True)
class BoolRef:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True, slots=True)
class NotE:
    arg: "Cond"

    def __str__(self) -> str:
        return f"!({self.arg})"


@dataclass(frozen=True, slots=True)
class AndE:
    args: tuple["Cond", ...]

    def __str__(self) -> str:
        return " && ".join(f"({a})" for a in self.args)


@dataclass(frozen=True, slots=True)
class OrE:
    args: tuple["Cond", ...]

    def __str__(self) -> str:
        return " || ".join(f"({a})" for a in self.args)


Cond = Union[Cmp, BoolLit, BoolRef, NotE, AndE, OrE]

_FLIP = {"<": ">=", "<=": ">", ">": "<=", ">=": "<", "==": "!=", "!=": "=="}


def negate(cond: Cond) -> Cond:
    """Negation with the NOT pushed to the leaves."""
    if isinstance(cond, BoolLit):
        return BoolLit(not cond.value)
    if isinstance(cond, BoolRef):
        return NotE(cond)
    if isinstance(cond, NotE):
        return cond.arg
    if isinstance(cond, AndE):
        return OrE(tuple(negate(a) for a in cond.args))
    if isinstance(cond, OrE):
        return AndE(tuple(negate(a) for a in cond.args))
    return Cmp(cond.lhs, _FLIP[cond.op], cond.rhs)


def cond_variables(cond: Cond) -> set[str]:
    if isinstance(cond, Cmp):
        return set(cond.lhs.variables()) | set(cond.rhs.variables())
    if isinstance(cond, BoolRef):
        return {cond.name}
    if isinstance(cond, NotE):
        return cond_variables(cond.arg)
    if isinstance(cond, (AndE, OrE)):
        out: set[str] = set()
        for a in cond.args:
            out |= cond_variables(a)
        return out
    return set()


def eval_cond(cond: Cond, env: dict) -> bool:
    if isinstance(cond, BoolLit):
        return cond.value
    if isinstance(cond, BoolRef):
        return bool(env[cond.name])
    if isinstance(cond, NotE):
        return not eval_cond(cond.arg, env)
    if isinstance(cond, AndE):
        return all(eval_cond(a, env) for a in cond.args)
    if isinstance(cond, OrE):
        return any(eval_cond(a, env) for a in cond.args)
    a, b = cond.lhs.eval(env), cond.rhs.eval(env)
    return {"<": a < b, "<=": a <= b, ">": a > b, ">=": a >= b,
            "==": a == b, "!=": a != b}[cond.op]


# ---------------------------------------------------------------------------
# Assertions
# ---------------------------------------------------------------------------

class AssertKind(Enum):
    DIV_ZERO = "div-zero"
    INT_OVERFLOW = "int-overflow"
    BUF_OVERFLOW = "buf-overflow"
    USE_AFTER_FREE = "use-after-free"

    @property
    def short(self) -> str:
        return _KIND_SHORT[self]


_KIND_SHORT = {
    AssertKind.DIV_ZERO: "div",
    AssertKind.INT_OVERFLOW: "overflow",
    AssertKind.BUF_OVERFLOW: "buf",
    AssertKind.USE_AFTER_FREE: "uaf",
}

KIND_TOKENS = {
    "div": AssertKind.DIV_ZERO,
    "div-zero": AssertKind.DIV_ZERO,
    "overflow": AssertKind.INT_OVERFLOW,
    "int-overflow": AssertKind.INT_OVERFLOW,
    "buf": AssertKind.BUF_OVERFLOW,
    "buf-overflow": AssertKind.BUF_OVERFLOW,
    "uaf": AssertKind.USE_AFTER_FREE,
    "use-after-free": AssertKind.USE_AFTER_FREE,
}


# ---------------------------------------------------------------------------
# Statements and terminators
# ---------------------------------------------------------------------------

@dataclass(frozen=True, slots=True)
class Assign:
    var: str
    expr: LinExpr


@dataclass(frozen=True, slots=True)
class BinOp:
    var: str
    lhs: LinExpr
    op: str  # one of BINOPS
    rhs: LinExpr


@dataclass(frozen=True, slots=True)
class BoolAssign:
    var: str
    expr: Cond


@dataclass(frozen=True, slots=True)
class Havoc:
    var: str
    lo: int | None  # None = -infinity
    hi: int | None  # None = +infinity


@dataclass(frozen=True, slots=True)
class Assume:
    cond: Cond


@dataclass(frozen=True, slots=True)
class Assert:
    kind: AssertKind
    cond: Cond
    aid: int


@dataclass(frozen=True, slots=True)
class ArrStore:
    array: str
    index: LinExpr
    value: LinExpr


@dataclass(frozen=True, slots=True)
class ArrLoad:
    var: str
    array: str
    index: LinExpr


@dataclass(frozen=True, slots=True)
class Alloc:
    handle: str


@dataclass(frozen=True, slots=True)
class Free:
    handle: str


@dataclass(frozen=True, slots=True)
class Deref:
    handle: str


Stmt = Union[Assign, BinOp, BoolAssign, Havoc, Assume, Assert,
             ArrStore, ArrLoad, Alloc, Free, Deref]


@dataclass(frozen=True, slots=True)
class Goto:
    target: str


@dataclass(frozen=True, slots=True)
class Branch:
    cond: Cond
    then_target: str
    else_target: str


@dataclass(frozen=True, slots=True)
class Return:
    pass


Terminator = Union[Goto, Branch, Return]


@dataclass(frozen=True, slots=True)
class Block:
    bid: str
    stmts: tuple[Stmt, ...]
    term: Terminator


@dataclass(frozen=True)
class Function:
    name: str
    params: tuple[str, ...]
    blocks: dict[str, Block]
    entry: str
    var_types: dict[str, str]  # var -> "int" | "bool"
    arrays: frozenset[str] = frozenset()
    handles: frozenset[str] = frozenset()

    def block_ids(self) -> tuple[str, ...]:
        return tuple(self.blocks)

    def assertions(self) -> Iterator[Assert]:
        for block in self.blocks.values():
            for stmt in block.stmts:
                if isinstance(stmt, Assert):
                    yield stmt


@dataclass(frozen=True)
class Program:
    functions: tuple[Function, ...]

    def function(self, name: str) -> Function:
        for fn in self.functions:
            if fn.name == name:
                return fn
        raise KeyError(name)

    def assertions(self) -> list[tuple[str, Assert]]:
        return [(fn.name, stmt) for fn in self.functions for stmt in fn.assertions()]

    def assertion_ids(self) -> set[int]:
        return {a.aid for _, a in self.assertions()}


# ---------------------------------------------------------------------------
# Serialization back to .air text
# ---------------------------------------------------------------------------

def _arith_to_text(e: ArithExpr) -> str:
    return str(e)


def _cond_to_text(c: Cond) -> str:
    return str(c)


def stmt_to_text(stmt: Stmt) -> str:
    if isinstance(stmt, Assign):
        return f"{stmt.var} = {stmt.expr};"
    if isinstance(stmt, BinOp):
        return f"{stmt.var} = ({stmt.lhs}) {stmt.op} ({stmt.rhs});"
    if isinstance(stmt, BoolAssign):
        return f"{stmt.var} = {_cond_to_text(stmt.expr)};"
    if isinstance(stmt, Havoc):
        lo = "-inf" if stmt.lo is None else str(stmt.lo)
        hi = "inf" if stmt.hi is None else str(stmt.hi)
        return f"{stmt.var} = havoc({lo}, {hi});"
    if isinstance(stmt, Assume):
        return f"assume {_cond_to_text(stmt.cond)};"
    if isinstance(stmt, Assert):
        return f"assert {stmt.kind.short}: {_cond_to_text(stmt.cond)} #{stmt.aid};"
    if isinstance(stmt, ArrStore):
        return f"{stmt.array}[{stmt.index}] = {stmt.value};"
    if isinstance(stmt, ArrLoad):
        return f"{stmt.var} = {stmt.array}[{stmt.index}];"
    if isinstance(stmt, Alloc):
        return f"alloc({stmt.handle});"
    if isinstance(stmt, Free):
        return f"free({stmt.handle});"
    return f"deref({stmt.handle});"


def program_to_text(program: Program) -> str:
    lines: list[str] = []
    for fn in program.functions:
        params = f"({', '.join(fn.params)})" if fn.params else ""
        lines.append(f"fn {fn.name}{params} {{")
        for block in fn.blocks.values():
            lines.append(f"  block {block.bid} {{")
            for stmt in block.stmts:
                lines.append(f"    {stmt_to_text(stmt)}")
            term = block.term
            if isinstance(term, Goto):
                lines.append(f"    goto {term.target};")
            elif isinstance(term, Branch):
                lines.append(f"    br ({_cond_to_text(term.cond)}) "
                             f"then: {term.then_target} else: {term.else_target};")
            else:
                lines.append("    return;")
            lines.append("  }")
        lines.append("}")
    return "\n".join(lines) + "\n"
