"""Parser for the textual .air format.

The grammar is documented in docs/ir-format.md.  Parsing happens in three
passes: a structural pass building untyped expression trees, a whole-program
type-inference pass (variables are int unless bool is forced by usage), and a
lowering/validation pass that produces the frozen IR and enforces the
well-formedness invariants (existing branch targets, unique assertion ids,
definite assignment before use on every CFG path).
"""

from __future__ import annotations

import re

from . import nodes as N
from .nodes import (AndE, ArrLoad, ArrStore, Alloc, Assert, Assign, Assume,
                    BinExpr, BinOp, Block, BoolAssign, BoolLit, BoolRef,
                    Branch, Cmp, Deref, Free, Function, Goto, Havoc, LinExpr,
                    NotE, OrE, Program, Return, len_var, lin, lin_const,
                    lin_var, status_var)


class ParseError(ValueError):
    def __init__(self, msg: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {msg}" if line else msg)


_TOKEN_RE = re.compile(r"""
    (?P<ws>\s+)
  | (?P<comment>//[^\n]*)
  | (?P<int>\d+)
  | (?P<name>\$?[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op><=|>=|==|!=|&&|\|\||[-+*/%<>=!(){}\[\],;:#])
""", re.VERBOSE)

_KEYWORDS = {"fn", "block", "goto", "br", "then", "else", "return", "havoc",
             "assume", "assert", "alloc", "free", "deref", "len", "status",
             "true", "false", "inf"}


class _Tok:
    __slots__ = ("kind", "text", "line")

    def __init__(self, kind: str, text: str, line: int):
        self.kind = kind
        self.text = text
        self.line = line

    def __repr__(self):
        return f"{self.text!r}@{self.line}"


def _tokenize(text: str) -> list[_Tok]:
    toks: list[_Tok] = []
    line = 1
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", line)
        pos = m.end()
        if m.lastgroup in ("ws", "comment"):
            line += m.group().count("\n")
            continue
        toks.append(_Tok(m.lastgroup, m.group(), line))
    toks.append(_Tok("eof", "<eof>", line))
    return toks


# Untyped expression trees built by the structural pass.
# ("num", n) ("var", name) ("bin", op, l, r) ("neg", e)
# ("cmp", op, l, r) ("and"/"or", [..]) ("not", e) ("bool", True/False)


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self, ahead: int = 0) -> _Tok:
        return self.toks[min(self.i + ahead, len(self.toks) - 1)]

    def next(self) -> _Tok:
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect(self, text: str) -> _Tok:
        tok = self.next()
        if tok.text != text:
            raise ParseError(f"expected {text!r} but found {tok.text!r}", tok.line)
        return tok

    def expect_name(self) -> _Tok:
        tok = self.next()
        if tok.kind != "name" or tok.text in _KEYWORDS:
            raise ParseError(f"expected identifier but found {tok.text!r}", tok.line)
        return tok

    # -- program structure --------------------------------------------------

    def parse_program(self) -> list[dict]:
        fns = []
        while self.peek().kind != "eof":
            fns.append(self.parse_fn())
        if not fns:
            raise ParseError("empty program", 1)
        return fns

    def parse_fn(self) -> dict:
        self.expect("fn")
        name = self.expect_name()
        params: list[str] = []
        if self.peek().text == "(":
            self.next()
            while self.peek().text != ")":
                params.append(self.expect_name().text)
                if self.peek().text == ",":
                    self.next()
            self.expect(")")
        self.expect("{")
        blocks = []
        while self.peek().text == "block":
            blocks.append(self.parse_block())
        self.expect("}")
        if not blocks:
            raise ParseError(f"function {name.text!r} has no blocks", name.line)
        return {"name": name.text, "params": params, "blocks": blocks,
                "line": name.line}

    def parse_block(self) -> dict:
        self.expect("block")
        bid = self.expect_name()
        self.expect("{")
        stmts: list[tuple] = []
        term = None
        while True:
            tok = self.peek()
            if tok.text == "}":
                break
            if tok.text in ("goto", "br", "return"):
                term = self.parse_terminator()
                break
            stmts.append(self.parse_stmt())
        self.expect("}")
        if term is None:
            raise ParseError(f"block {bid.text!r} has no terminator", bid.line)
        return {"bid": bid.text, "stmts": stmts, "term": term, "line": bid.line}

    def parse_terminator(self) -> tuple:
        tok = self.next()
        if tok.text == "goto":
            target = self.expect_name()
            self.expect(";")
            return ("goto", target.text, tok.line)
        if tok.text == "return":
            self.expect(";")
            return ("return", tok.line)
        self.expect("(")
        cond = self.parse_bool_expr()
        self.expect(")")
        self.expect("then")
        self.expect(":")
        then_t = self.expect_name()
        self.expect("else")
        self.expect(":")
        else_t = self.expect_name()
        self.expect(";")
        return ("br", cond, then_t.text, else_t.text, tok.line)

    # -- statements ----------------------------------------------------------

    def parse_stmt(self) -> tuple:
        tok = self.peek()
        if tok.text == "assume":
            self.next()
            cond = self.parse_bool_expr()
            self.expect(";")
            return ("assume", cond, tok.line)
        if tok.text == "assert":
            self.next()
            kind = self.parse_assert_kind()
            self.expect(":")
            cond = self.parse_bool_expr()
            self.expect("#")
            aid = self.next()
            if aid.kind != "int":
                raise ParseError("assertion id must be an integer", aid.line)
            self.expect(";")
            return ("assert", kind, cond, int(aid.text), tok.line)
        if tok.text in ("alloc", "free", "deref"):
            self.next()
            self.expect("(")
            h = self.expect_name()
            self.expect(")")
            self.expect(";")
            return (tok.text, h.text, tok.line)
        return self.parse_assignment()

    def parse_assert_kind(self) -> N.AssertKind:
        parts = [self.next()]
        if parts[0].kind != "name":
            raise ParseError("expected assertion kind", parts[0].line)
        while self.peek().text == "-" and self.peek(1).kind == "name":
            self.next()
            parts.append(self.next())
        token = "-".join(p.text for p in parts)
        if token not in N.KIND_TOKENS:
            raise ParseError(f"unknown assertion kind {token!r}", parts[0].line)
        return N.KIND_TOKENS[token]

    def parse_lvalue(self) -> tuple:
        tok = self.next()
        if tok.text == "len":
            self.expect("(")
            arr = self.expect_name()
            self.expect(")")
            return ("lenvar", arr.text, tok.line)
        if tok.kind != "name" or tok.text in _KEYWORDS:
            raise ParseError(f"expected assignable location, found {tok.text!r}", tok.line)
        if self.peek().text == "[":
            self.next()
            idx = self.parse_arith()
            self.expect("]")
            return ("subscript", tok.text, idx, tok.line)
        return ("var", tok.text, tok.line)

    def parse_assignment(self) -> tuple:
        lv = self.parse_lvalue()
        self.expect("=")
        if lv[0] == "subscript":
            value = self.parse_arith()
            self.expect(";")
            return ("arr_store", lv[1], lv[2], value, lv[3])
        target = len_var(lv[1]) if lv[0] == "lenvar" else lv[1]
        tok = self.peek()
        if tok.text == "havoc":
            self.next()
            self.expect("(")
            lo = self.parse_bound()
            self.expect(",")
            hi = self.parse_bound()
            self.expect(")")
            self.expect(";")
            return ("havoc", target, lo, hi, tok.line)
        if (tok.kind == "name" and tok.text not in _KEYWORDS
                and self.peek(1).text == "[" and lv[0] == "var"):
            arr = self.next()
            self.expect("[")
            idx = self.parse_arith()
            self.expect("]")
            self.expect(";")
            return ("arr_load", target, arr.text, idx, tok.line)
        expr = self.parse_bool_expr()
        self.expect(";")
        return ("assign", target, expr, tok.line)

    def parse_bound(self) -> int | None:
        neg = False
        if self.peek().text == "-":
            self.next()
            neg = True
        tok = self.next()
        if tok.text == "inf":
            return None
        if tok.kind != "int":
            raise ParseError(f"expected havoc bound, found {tok.text!r}", tok.line)
        v = int(tok.text)
        return -v if neg else v

    # -- expressions ---------------------------------------------------------
    # bool-or > bool-and > not > comparison > additive > multiplicative > unary

    def parse_bool_expr(self) -> tuple:
        items = [self.parse_bool_and()]
        while self.peek().text == "||":
            self.next()
            items.append(self.parse_bool_and())
        return items[0] if len(items) == 1 else ("or", items)

    def parse_bool_and(self) -> tuple:
        items = [self.parse_bool_not()]
        while self.peek().text == "&&":
            self.next()
            items.append(self.parse_bool_not())
        return items[0] if len(items) == 1 else ("and", items)

    def parse_bool_not(self) -> tuple:
        if self.peek().text == "!":
            tok = self.next()
            return ("not", self.parse_bool_not(), tok.line)
        return self.parse_comparison()

    def parse_comparison(self) -> tuple:
        if self.peek().text == "true":
            self.next()
            return ("bool", True)
        if self.peek().text == "false":
            self.next()
            return ("bool", False)
        lhs = self.parse_arith()
        tok = self.peek()
        if tok.text in N.CMP_OPS:
            self.next()
            rhs = self.parse_arith()
            return ("cmp", tok.text, lhs, rhs, tok.line)
        return lhs

    def parse_arith(self) -> tuple:
        node = self.parse_mul()
        while self.peek().text in ("+", "-"):
            op = self.next()
            node = ("bin", op.text, node, self.parse_mul(), op.line)
        return node

    def parse_mul(self) -> tuple:
        node = self.parse_unary()
        while self.peek().text in ("*", "/", "%"):
            op = self.next()
            node = ("bin", op.text, node, self.parse_unary(), op.line)
        return node

    def parse_unary(self) -> tuple:
        tok = self.peek()
        if tok.text == "-":
            self.next()
            return ("neg", self.parse_unary(), tok.line)
        if tok.text == "(":
            self.next()
            inner = self.parse_bool_expr()
            self.expect(")")
            return inner
        if tok.kind == "int":
            self.next()
            return ("num", int(tok.text))
        if tok.text in ("len", "status"):
            self.next()
            self.expect("(")
            name = self.expect_name()
            self.expect(")")
            make = len_var if tok.text == "len" else status_var
            return ("var", make(name.text), tok.line)
        if tok.kind == "name" and tok.text not in _KEYWORDS:
            self.next()
            return ("var", tok.text, tok.line)
        raise ParseError(f"unexpected token {tok.text!r} in expression", tok.line)


# ---------------------------------------------------------------------------
# Type inference
# ---------------------------------------------------------------------------

def _expr_vars(tree, out: set[str]) -> None:
    tag = tree[0]
    if tag == "var":
        out.add(tree[1])
    elif tag in ("bin", "cmp"):
        _expr_vars(tree[2], out)
        _expr_vars(tree[3], out)
    elif tag in ("neg", "not"):
        _expr_vars(tree[1], out)
    elif tag in ("and", "or"):
        for item in tree[1]:
            _expr_vars(item, out)


def _is_bool_tree(tree) -> bool:
    return tree[0] in ("cmp", "and", "or", "not", "bool")


def _infer_types(fns: list[dict]) -> dict[str, dict[str, str]]:
    """Per-function variable typing: int unless forced bool.

    Copies ``x = y`` propagate types in both directions; a variable used both
    as int and bool is a type error.
    """
    all_types: dict[str, dict[str, str]] = {}
    for fn in fns:
        types: dict[str, str] = {p: "int" for p in fn["params"]}
        copies: list[tuple[str, str, int]] = []

        def force(var: str, ty: str, line: int):
            old = types.get(var)
            if old is not None and old != ty:
                raise ParseError(f"variable {var!r} used as both int and bool", line)
            types[var] = ty

        def force_int_tree(tree, line: int):
            out: set[str] = set()
            _expr_vars(tree, out)
            # Leaves of an arithmetic tree are ints; bool leaves only occur
            # as bare vars directly under boolean structure.
            for v in out:
                force(v, "int", line)

        def walk_bool(tree, line: int):
            tag = tree[0]
            if tag == "cmp":
                force_int_tree(tree[2], line)
                force_int_tree(tree[3], line)
            elif tag in ("and", "or"):
                for item in tree[1]:
                    walk_bool(item, line)
            elif tag == "not":
                walk_bool(tree[1], line)
            elif tag == "var":
                force(tree[1], "bool", tree[2])
            elif tag == "bool":
                pass
            else:  # bare arithmetic in boolean position is rejected later
                force_int_tree(tree, line)

        for block in fn["blocks"]:
            for stmt in block["stmts"]:
                tag = stmt[0]
                if tag == "havoc":
                    force(stmt[1], "int", stmt[4])
                elif tag == "assign":
                    target, expr, line = stmt[1], stmt[2], stmt[3]
                    if _is_bool_tree(expr):
                        force(target, "bool", line)
                        walk_bool(expr, line)
                    elif expr[0] == "var":
                        copies.append((target, expr[1], line))
                    else:
                        force(target, "int", line)
                        force_int_tree(expr, line)
                elif tag in ("assume",):
                    walk_bool(stmt[1], stmt[2])
                elif tag == "assert":
                    walk_bool(stmt[2], stmt[4])
                elif tag == "arr_store":
                    force_int_tree(stmt[2], stmt[4])
                    force_int_tree(stmt[3], stmt[4])
                elif tag == "arr_load":
                    force(stmt[1], "int", stmt[4])
                    force_int_tree(stmt[3], stmt[4])
            term = block["term"]
            if term[0] == "br":
                walk_bool(term[1], term[4])

        changed = True
        while changed:
            changed = False
            for a, b, line in copies:
                ta, tb = types.get(a), types.get(b)
                if ta and tb and ta != tb:
                    raise ParseError(f"copy {a!r} = {b!r} mixes int and bool", line)
                if ta and not tb:
                    types[b] = ta
                    changed = True
                if tb and not ta:
                    types[a] = tb
                    changed = True
        for a, b, _ in copies:
            types.setdefault(a, "int")
            types.setdefault(b, "int")
        all_types[fn["name"]] = types
    return all_types


# ---------------------------------------------------------------------------
# Lowering to the frozen IR
# ---------------------------------------------------------------------------

class _Lowerer:
    """Turns untyped trees into IR statements, introducing $t temps so that
    every source-level nonlinear operator occurrence is its own binop."""

    def __init__(self, types: dict[str, str]):
        self.types = types
        self.temp_count = 0
        self.out: list[N.Stmt] = []

    def fresh_temp(self) -> str:
        name = f"$t{self.temp_count}"
        self.temp_count += 1
        self.types[name] = "int"
        return name

    def lower_arith(self, tree) -> LinExpr:
        """Lower to a linear expression, emitting temp binops for nonlinear parts."""
        tag = tree[0]
        if tag == "num":
            return lin_const(tree[1])
        if tag == "var":
            if self.types.get(tree[1]) == "bool":
                raise ParseError(f"bool variable {tree[1]!r} in arithmetic", tree[2])
            return lin_var(tree[1])
        if tag == "neg":
            return self.lower_arith(tree[1]).scale(-1)
        op, lhs, rhs, line = tree[1], self.lower_arith(tree[2]), self.lower_arith(tree[3]), tree[4]
        if op == "+":
            return lhs.add(rhs)
        if op == "-":
            return lhs.sub(rhs)
        if op == "*" and rhs.is_const():
            return lhs.scale(rhs.const)
        if op == "*" and lhs.is_const():
            return rhs.scale(lhs.const)
        tmp = self.fresh_temp()
        self.out.append(BinOp(tmp, lhs, op, rhs))
        return lin_var(tmp)

    def lower_arith_top(self, target: str, tree) -> N.Stmt:
        """Lower an assignment, keeping a top-level operator as the binop."""
        if tree[0] == "bin":
            op = tree[1]
            lhs = self.lower_arith(tree[2])
            rhs = self.lower_arith(tree[3])
            if tree[1] == "*" and (lhs.is_const() or rhs.is_const()):
                return Assign(target, lhs.scale(rhs.const) if rhs.is_const()
                              else rhs.scale(lhs.const))
            return BinOp(target, lhs, op, rhs)
        return Assign(target, self.lower_arith(tree))

    def lower_cmp_side(self, tree) -> N.ArithExpr:
        """A comparison side: linear, or one nonlinear op over linear operands."""
        if tree[0] == "bin" and tree[1] in N.NONLINEAR_OPS:
            lhs = self._lower_linear_only(tree[2])
            rhs = self._lower_linear_only(tree[3])
            if tree[1] == "*" and rhs.is_const():
                return lhs.scale(rhs.const)
            if tree[1] == "*" and lhs.is_const():
                return rhs.scale(lhs.const)
            return BinExpr(lhs, tree[1], rhs)
        return self._lower_linear_only(tree)

    def _lower_linear_only(self, tree) -> LinExpr:
        tag = tree[0]
        if tag == "num":
            return lin_const(tree[1])
        if tag == "var":
            if self.types.get(tree[1]) == "bool":
                raise ParseError(f"bool variable {tree[1]!r} in arithmetic", tree[2])
            return lin_var(tree[1])
        if tag == "neg":
            return self._lower_linear_only(tree[1]).scale(-1)
        if tag == "bin":
            op = tree[1]
            lhs = self._lower_linear_only(tree[2])
            rhs = self._lower_linear_only(tree[3])
            if op == "+":
                return lhs.add(rhs)
            if op == "-":
                return lhs.sub(rhs)
            if op == "*" and rhs.is_const():
                return lhs.scale(rhs.const)
            if op == "*" and lhs.is_const():
                return rhs.scale(lhs.const)
            raise ParseError("nonlinear condition too deeply nested", tree[4])
        raise ParseError("malformed expression", 0)

    def lower_cond(self, tree) -> N.Cond:
        tag = tree[0]
        if tag == "bool":
            return BoolLit(tree[1])
        if tag == "var":
            if self.types.get(tree[1]) != "bool":
                raise ParseError(f"variable {tree[1]!r} is not boolean", tree[2])
            return BoolRef(tree[1])
        if tag == "not":
            return NotE(self.lower_cond(tree[1]))
        if tag == "and":
            return AndE(tuple(self.lower_cond(t) for t in tree[1]))
        if tag == "or":
            return OrE(tuple(self.lower_cond(t) for t in tree[1]))
        if tag == "cmp":
            return Cmp(self.lower_cmp_side(tree[2]), tree[1], self.lower_cmp_side(tree[3]))
        raise ParseError("expected a boolean expression", tree[-1] if tree else 0)

    def lower_stmt(self, stmt: tuple) -> list[N.Stmt]:
        self.out = []
        tag = stmt[0]
        if tag == "havoc":
            _, var, lo, hi, line = stmt
            if lo is not None and hi is not None and lo > hi:
                raise ParseError(f"empty havoc range [{lo}, {hi}]", line)
            self.out.append(Havoc(var, lo, hi))
        elif tag == "assign":
            _, target, expr, line = stmt
            if self.types.get(target) == "bool":
                self.out.append(BoolAssign(target, self.lower_cond(expr)))
            else:
                self.out.append(self.lower_arith_top(target, expr))
        elif tag == "assume":
            self.out.append(Assume(self.lower_cond(stmt[1])))
        elif tag == "assert":
            self.out.append(Assert(stmt[1], self.lower_cond(stmt[2]), stmt[3]))
        elif tag == "arr_store":
            _, arr, idx, value, _line = stmt
            index = self.lower_arith(idx)
            val = self.lower_arith(value)
            self.out.append(ArrStore(arr, index, val))
        elif tag == "arr_load":
            _, var, arr, idx, _line = stmt
            index = self.lower_arith(idx)
            self.out.append(ArrLoad(var, arr, index))
        elif tag == "alloc":
            self.out.append(Alloc(stmt[1]))
        elif tag == "free":
            self.out.append(Free(stmt[1]))
        elif tag == "deref":
            self.out.append(Deref(stmt[1]))
        else:
            raise ParseError(f"unhandled statement {tag}", 0)
        return self.out


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------

def _stmt_defs(stmt: N.Stmt) -> tuple[str, ...]:
    if isinstance(stmt, (Assign, BinOp, BoolAssign, Havoc, ArrLoad)):
        return (stmt.var,)
    if isinstance(stmt, (Alloc, Free)):
        return (status_var(stmt.handle),)
    return ()


def _stmt_uses(stmt: N.Stmt) -> set[str]:
    if isinstance(stmt, Assign):
        return set(stmt.expr.variables())
    if isinstance(stmt, BinOp):
        return set(stmt.lhs.variables()) | set(stmt.rhs.variables())
    if isinstance(stmt, BoolAssign):
        return N.cond_variables(stmt.expr)
    if isinstance(stmt, Assume):
        return N.cond_variables(stmt.cond)
    if isinstance(stmt, Assert):
        return N.cond_variables(stmt.cond)
    if isinstance(stmt, ArrStore):
        return set(stmt.index.variables()) | set(stmt.value.variables()) | {len_var(stmt.array)}
    if isinstance(stmt, ArrLoad):
        return set(stmt.index.variables()) | {len_var(stmt.array)}
    if isinstance(stmt, Deref):
        return {status_var(stmt.handle)}
    return set()


def _check_definite_assignment(fn: Function) -> None:
    block_ids = list(fn.blocks)
    universe = set(fn.var_types)
    preds: dict[str, list[str]] = {b: [] for b in block_ids}
    for block in fn.blocks.values():
        for succ in _successors(block):
            preds[succ].append(block.bid)

    out_sets: dict[str, set[str]] = {b: set(universe) for b in block_ids}
    in_sets: dict[str, set[str]] = {b: set(universe) for b in block_ids}
    in_sets[fn.entry] = set(fn.params)

    changed = True
    while changed:
        changed = False
        for bid in block_ids:
            block = fn.blocks[bid]
            if bid != fn.entry:
                incoming = [out_sets[p] for p in preds[bid]]
                new_in = set.intersection(*incoming) if incoming else set(universe)
            else:
                new_in = set(fn.params)
            cur = set(new_in)
            for stmt in block.stmts:
                cur.update(_stmt_defs(stmt))
            if new_in != in_sets[bid] or cur != out_sets[bid]:
                in_sets[bid], out_sets[bid] = new_in, cur
                changed = True

    for bid in block_ids:
        block = fn.blocks[bid]
        assigned = set(in_sets[bid])
        for stmt in block.stmts:
            missing = _stmt_uses(stmt) - assigned
            if missing:
                name = sorted(missing)[0]
                raise ParseError(
                    f"variable {name!r} may be used before assignment in "
                    f"function {fn.name!r}, block {bid!r}")
            assigned.update(_stmt_defs(stmt))
        if isinstance(block.term, Branch):
            missing = N.cond_variables(block.term.cond) - assigned
            if missing:
                name = sorted(missing)[0]
                raise ParseError(
                    f"variable {name!r} may be used before assignment in "
                    f"branch of block {bid!r}")


def _successors(block: Block) -> tuple[str, ...]:
    term = block.term
    if isinstance(term, Goto):
        return (term.target,)
    if isinstance(term, Branch):
        return (term.then_target, term.else_target)
    return ()


def parse_program(text: str) -> Program:
    """Parse .air source text into a validated Program."""
    raw_fns = _Parser(text).parse_program()
    seen_fn_names: set[str] = set()
    for fn in raw_fns:
        if fn["name"] in seen_fn_names:
            raise ParseError(f"duplicate function {fn['name']!r}", fn["line"])
        seen_fn_names.add(fn["name"])
        if len(set(fn["params"])) != len(fn["params"]):
            raise ParseError(f"duplicate parameter in {fn['name']!r}", fn["line"])

    all_types = _infer_types(raw_fns)
    functions: list[Function] = []
    seen_aids: dict[int, str] = {}

    for fn in raw_fns:
        types = all_types[fn["name"]]
        lowerer = _Lowerer(types)
        blocks: dict[str, Block] = {}
        arrays: set[str] = set()
        handles: set[str] = set()
        for raw_block in fn["blocks"]:
            bid = raw_block["bid"]
            if bid in blocks:
                raise ParseError(f"duplicate block {bid!r}", raw_block["line"])
            stmts: list[N.Stmt] = []
            for raw_stmt in raw_block["stmts"]:
                line = raw_stmt[-1]
                for stmt in lowerer.lower_stmt(raw_stmt):
                    if isinstance(stmt, Assert):
                        if stmt.aid in seen_aids:
                            raise ParseError(
                                f"duplicate assertion id #{stmt.aid}", line)
                        seen_aids[stmt.aid] = fn["name"]
                    if isinstance(stmt, (ArrStore, ArrLoad)):
                        arrays.add(stmt.array)
                    if isinstance(stmt, (Alloc, Free, Deref)):
                        handles.add(stmt.handle)
                    stmts.append(stmt)
            term_tree = raw_block["term"]
            if term_tree[0] == "goto":
                term: N.Terminator = Goto(term_tree[1])
            elif term_tree[0] == "return":
                term = Return()
            else:
                term = Branch(lowerer.lower_cond(term_tree[1]),
                              term_tree[2], term_tree[3])
            blocks[bid] = Block(bid, tuple(stmts), term)

        for arr in arrays:
            types.setdefault(len_var(arr), "int")
        for h in handles:
            types.setdefault(status_var(h), "int")
        entry = fn["blocks"][0]["bid"]
        for block in blocks.values():
            for succ in _successors(block):
                if succ not in blocks:
                    raise ParseError(
                        f"dangling branch target {succ!r} in block {block.bid!r}")
        function = Function(
            name=fn["name"], params=tuple(fn["params"]), blocks=blocks,
            entry=entry, var_types=types, arrays=frozenset(arrays),
            handles=frozenset(handles))
        _check_definite_assignment(function)
        functions.append(function)

    return Program(tuple(functions))
