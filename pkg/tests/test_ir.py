"""Parser, serializer, concrete executor, and instrumenter tests."""

import pytest

from airtune.ir import (AssertKind, Assert, Assign, Assume, BinOp, Cmp,
                        ExecutionBudgetError, ParseError, concrete_run_all,
                        count_risky, instrument, parse_program,
                        program_to_text)


MINIMAL = "fn main { block e { x = havoc(0,3); assert div: x != 0 #1; return; } }"


class TestParser:
    def test_minimal_program(self):
        p = parse_program(MINIMAL)
        assert len(p.functions) == 1
        fn = p.functions[0]
        assert len(fn.blocks) == 1
        assert len(list(fn.assertions())) == 1

    def test_dangling_branch_target(self):
        text = "fn main { block e { x = 1; goto b_missing; } }"
        with pytest.raises(ParseError, match="dangling branch target"):
            parse_program(text)

    def test_duplicate_assertion_id(self):
        text = """
fn main { block e {
  x = 1;
  assert div: x != 0 #1;
  assert div: x != 0 #1;
  return;
} }
"""
        with pytest.raises(ParseError, match="duplicate assertion id"):
            parse_program(text)

    def test_use_before_assignment(self):
        text = "fn main { block e { y = x + 1; return; } }"
        with pytest.raises(ParseError, match="used before assignment"):
            parse_program(text)

    def test_use_before_assignment_on_one_path(self):
        text = """
fn main {
  block e { c = havoc(0,1); br (c == 0) then: a else: b; }
  block a { x = 1; goto j; }
  block b { goto j; }
  block j { y = x; return; }
}
"""
        with pytest.raises(ParseError, match="used before assignment"):
            parse_program(text)

    def test_block_without_terminator(self):
        with pytest.raises(ParseError, match="no terminator"):
            parse_program("fn main { block e { x = 1; } }")

    def test_type_conflict(self):
        text = "fn main { block e { b = true; b = 1 + 2; return; } }"
        with pytest.raises(ParseError, match="int and bool"):
            parse_program(text)

    def test_compound_expression_lowering(self):
        p = parse_program("fn main { block e { a = havoc(0,2); b = havoc(0,2); "
                          "x = a * b + a; return; } }")
        stmts = p.functions[0].blocks["e"].stmts
        # a * b is hoisted into a temp, innermost first; the top-level
        # addition stays the statement's own binop.
        binops = [s for s in stmts if isinstance(s, BinOp)]
        assert [s.op for s in binops] == ["*", "+"]
        assert binops[0].var.startswith("$t")
        assert binops[1].var == "x"

    def test_linear_subterms_fold(self):
        p = parse_program("fn main { block e { a = havoc(0,2); "
                          "x = 2 * a - 3; return; } }")
        stmts = p.functions[0].blocks["e"].stmts
        # The constant multiplication folds into a linear operand; only the
        # top-level subtraction remains an operator occurrence.
        assert isinstance(stmts[-1], BinOp) and stmts[-1].op == "-"
        assert stmts[-1].lhs.terms == (("a", 2),)

    def test_bare_copy_is_one_assign(self):
        p = parse_program("fn main { block e { a = havoc(0,2); x = a; "
                          "return; } }")
        assert isinstance(p.functions[0].blocks["e"].stmts[-1], Assign)

    def test_roundtrip(self, corpus_programs):
        for name, program in corpus_programs.items():
            again = parse_program(program_to_text(program))
            assert program_to_text(again) == program_to_text(program), name

    def test_rejects_garbage(self):
        with pytest.raises(ParseError):
            parse_program("fn main { block e { x := 1; return; } }")

    def test_empty_havoc_range(self):
        with pytest.raises(ParseError, match="empty havoc range"):
            parse_program("fn main { block e { x = havoc(3, 1); return; } }")

    def test_len_and_status_vars(self):
        p = parse_program("""
fn main { block e {
  len(a) = 4;
  i = havoc(0, 3);
  a[i] = 1;
  alloc(h);
  deref(h);
  return;
} }
""")
        fn = p.functions[0]
        assert "len(a)" in fn.var_types
        assert "status(h)" in fn.var_types

    def test_array_requires_length(self):
        with pytest.raises(ParseError, match="len"):
            parse_program("fn main { block e { i = 0; a[i] = 1; return; } }")


class TestExecutor:
    def test_havoc_bound_holds(self):
        p = parse_program("fn main { block e { x = havoc(0,3); "
                          "assert overflow: x <= 3 #1; return; } }")
        v = concrete_run_all(p)
        assert v.verdicts[1] == "holds-on-all-runs"
        assert v.run_count == 4

    def test_boundary_violation(self):
        p = parse_program("fn main { block e { x = havoc(0,3); "
                          "assert overflow: x < 3 #1; return; } }")
        v = concrete_run_all(p)
        assert v.verdicts[1] == "violated"

    def test_loop_execution(self, loop_program):
        v = concrete_run_all(loop_program)
        assert v.verdicts[1] == "holds-on-all-runs"

    def test_state_budget(self):
        p = parse_program("fn main { block e { x = havoc(0,100); "
                          "y = havoc(0,100); assert div: x != -1 #1; return; } }")
        with pytest.raises(ExecutionBudgetError, match="state budget"):
            concrete_run_all(p, max_states=100)

    def test_step_cap(self, loop_program):
        with pytest.raises(ExecutionBudgetError, match="step cap"):
            concrete_run_all(loop_program, max_steps_per_run=5)

    def test_infinite_havoc_rejected(self):
        p = parse_program("fn main { block e { x = havoc(0, inf); return; } }")
        with pytest.raises(ExecutionBudgetError, match="infinite"):
            concrete_run_all(p)

    def test_every_assertion_has_a_verdict(self, corpus_programs):
        for name, program in corpus_programs.items():
            v = concrete_run_all(program, max_states=100000)
            assert set(v.verdicts) == program.assertion_ids(), name

    def test_assume_prunes(self):
        p = parse_program("fn main { block e { x = havoc(0,5); assume x == 2; "
                          "assert overflow: x == 2 #1; return; } }")
        assert concrete_run_all(p).verdicts[1] == "holds-on-all-runs"

    def test_use_after_free_fires(self):
        p = parse_program("""
fn main { block e {
  alloc(h);
  free(h);
  assert uaf: status(h) == 1 #1;
  deref(h);
  return;
} }
""")
        assert concrete_run_all(p).verdicts[1] == "violated"


class TestInstrument:
    def test_division_guard(self):
        p = parse_program("fn main { block e { a = havoc(1,5); b = havoc(0,2); "
                          "y = a / b; return; } }")
        inst = instrument(p, {AssertKind.DIV_ZERO})
        asserts = [s for s in inst.functions[0].blocks["e"].stmts
                   if isinstance(s, Assert)]
        assert len(asserts) == 1
        assert asserts[0].kind is AssertKind.DIV_ZERO
        # the guard sits immediately before the division
        stmts = inst.functions[0].blocks["e"].stmts
        i = stmts.index(asserts[0])
        assert isinstance(stmts[i + 1], BinOp) and stmts[i + 1].op == "/"

    def test_store_guard(self):
        p = parse_program("fn main { block e { len(a) = 4; i = havoc(0,5); "
                          "a[i] = 5; return; } }")
        inst = instrument(p, {AssertKind.BUF_OVERFLOW})
        asserts = list(inst.functions[0].assertions())
        assert len(asserts) == 1
        assert asserts[0].kind is AssertKind.BUF_OVERFLOW
        assert concrete_run_all(inst).verdicts[asserts[0].aid] == "violated"

    def test_free_then_deref_guard(self):
        p = parse_program("fn main { block e { alloc(h); free(h); deref(h); "
                          "return; } }")
        inst = instrument(p, {AssertKind.USE_AFTER_FREE})
        asserts = list(inst.functions[0].assertions())
        assert len(asserts) == 1
        assert concrete_run_all(inst).verdicts[asserts[0].aid] == "violated"

    def test_ids_continue_from_max(self):
        p = parse_program("fn main { block e { a = havoc(1,2); "
                          "assert div: a != 0 #7; y = 6 / a; return; } }")
        inst = instrument(p, set(AssertKind))
        ids = {a.aid for a in inst.functions[0].assertions()}
        assert 7 in ids and min(ids - {7}) == 8

    def test_insertion_count_matches_risky_count(self, corpus_programs):
        kinds = set(AssertKind)
        for name, program in corpus_programs.items():
            inst = instrument(program, kinds, 16)
            added = len(inst.assertions()) - len(program.assertions())
            assert added == count_risky(program, kinds, 16), name

    def test_second_pass_adds_guards_again(self):
        p = parse_program("fn main { block e { a = havoc(1,2); y = 6 / a; "
                          "return; } }")
        once = instrument(p, set(AssertKind))
        twice = instrument(once, set(AssertKind))
        delta1 = len(once.assertions()) - len(p.assertions())
        delta2 = len(twice.assertions()) - len(once.assertions())
        assert delta1 == delta2 == count_risky(p, set(AssertKind))

    def test_constant_folded_binop_skipped(self):
        p = parse_program("fn main { block e { x = 6 / 2; y = 1000 / 1; "
                          "return; } }")
        inst = instrument(p, {AssertKind.INT_OVERFLOW}, bit_width=8)
        kinds = [a.kind for a in inst.functions[0].assertions()]
        # 3 fits in 8 bits and is skipped; 1000 does not
        assert kinds == [AssertKind.INT_OVERFLOW]

    def test_existing_assertions_preserved(self):
        p = parse_program(MINIMAL)
        inst = instrument(p, set(AssertKind))
        assert 1 in inst.assertion_ids()
