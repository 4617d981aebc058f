"""Unit tests for the lattice operations, with independently computed
expected values for everything that is not immediate from a definition."""

import pytest

from airtune.domains import (BOTTOM, DomainId, VarSetMismatchError, comparable,
                             default_poset, narrow, reduce_state)
from airtune.domains.api import get_domain
from airtune.domains.boxes import cong_join, cong_meet, reduce_ric_payload
from airtune.ir import (Assign, Cmp, Havoc, lin, lin_const, lin_var)

INF = float("inf")

D = DomainId
iv = get_domain(D.INTERVALS)
di = get_domain(D.DISINT)
ric = get_domain(D.RIC)
zn = get_domain(D.ZONES)
oc = get_domain(D.OCTAGONS)
bl = get_domain(D.BOOL)
pz = get_domain(D.PROD_BOOL_ZONES)


def ivstate(**bounds):
    s = iv.make_top(tuple(bounds), ())
    for v, (lo, hi) in bounds.items():
        s = iv.assign_interval(s, v, lo, hi)
    return s


class TestLeq:
    def test_interval_containment(self):
        assert iv.leq(ivstate(x=(1, 2)), ivstate(x=(0, 5)))
        assert not iv.leq(ivstate(x=(0, 5)), ivstate(x=(1, 2)))

    def test_bottom_least(self):
        assert iv.leq(BOTTOM, ivstate(x=(0, 5)))

    def test_zones_bound_comparison(self):
        top = zn.make_top(("x", "y"), ())
        a = zn.assume(top, Cmp(lin_var("x").sub(lin_var("y")), "<=", lin_const(1)))
        b = zn.assume(top, Cmp(lin_var("x").sub(lin_var("y")), "<=", lin_const(0)))
        assert not zn.leq(a, b)
        assert zn.leq(b, a)

    def test_varset_mismatch(self):
        with pytest.raises(VarSetMismatchError):
            iv.leq(ivstate(x=(0, 1)), ivstate(y=(0, 1)))


class TestJoinMeet:
    def test_interval_hull(self):
        j = iv.join(ivstate(x=(0, 1)), ivstate(x=(3, 4)))
        assert iv.bounds(j, "x") == (0, 4)

    def test_disint_keeps_disjuncts(self):
        top = di.make_top(("x",), ())
        j = di.join(di.assign_interval(top, "x", 0, 1),
                    di.assign_interval(top, "x", 3, 4))
        assert j.store["x"] == ((0, 1), (3, 4))

    def test_disint_merges_adjacent(self):
        top = di.make_top(("x",), ())
        j = di.join(di.assign_interval(top, "x", 0, 1),
                    di.assign_interval(top, "x", 2, 3))
        assert j.store["x"] == ((0, 3),)

    def test_congruence_join_by_sampling(self):
        # Oracle: smallest class containing both 4Z+1 and 6Z+1 over a range.
        joined = cong_join((4, 1), (6, 1))
        members = [n for n in range(-60, 60) if n % 4 == 1 or n % 6 == 1]
        a, b = joined
        assert all((n - b) % a == 0 for n in members)
        assert joined == (2, 1)

    def test_zones_meet_negative_cycle(self):
        top = zn.make_top(("x", "y"), ())
        a = zn.assume(top, Cmp(lin_var("x").sub(lin_var("y")), "<=", lin_const(3)))
        b = zn.assume(top, Cmp(lin_var("y").sub(lin_var("x")), "<=", lin_const(-5)))
        assert zn.meet(a, b) is BOTTOM

    def test_cong_meet_crt(self):
        # Oracle: brute-force common members of 4Z+1 and 6Z+5.
        met = cong_meet((4, 1), (6, 5))
        members = [n for n in range(-200, 200) if n % 4 == 1 and n % 6 == 5]
        a, b = met
        assert members == [n for n in range(-200, 200) if (n - b) % a == 0]


class TestWidenNarrow:
    def test_widen_no_thresholds(self):
        w = iv.widen(ivstate(x=(0, 1)), ivstate(x=(0, 2)), [])
        assert iv.bounds(w, "x") == (0, INF)

    def test_widen_with_thresholds(self):
        w = iv.widen(ivstate(x=(0, 1)), ivstate(x=(0, 2)), [10, 100])
        assert iv.bounds(w, "x") == (0, 10)

    def test_widen_stable_point(self):
        w = iv.widen(ivstate(x=(0, 5)), ivstate(x=(0, 5)), [])
        assert iv.bounds(w, "x") == (0, 5)

    def test_widen_lower_bound_dual(self):
        w = iv.widen(ivstate(x=(0, 5)), ivstate(x=(-3, 5)), [-10, 10])
        assert iv.bounds(w, "x") == (-10, 5)

    def test_narrow_refines_infinite_bound(self):
        n = narrow(D.INTERVALS, ivstate(x=(0, INF)), ivstate(x=(0, 10)))
        assert iv.bounds(n, "x") == (0, 10)

    def test_narrow_keeps_finite_bound(self):
        n = narrow(D.INTERVALS, ivstate(x=(0, 20)), ivstate(x=(0, 10)))
        assert iv.bounds(n, "x") == (0, 20)

    def test_narrow_bottom(self):
        assert narrow(D.INTERVALS, ivstate(x=(0, 20)), BOTTOM) is BOTTOM

    def test_narrow_checks_precondition(self):
        with pytest.raises(ValueError, match="narrow"):
            narrow(D.INTERVALS, ivstate(x=(0, 5)), ivstate(x=(0, 10)))


class TestTransfer:
    def test_interval_arithmetic(self):
        s = ivstate(x=(0, 3), y=(0, 0))
        out = iv.transfer(s, Assign("y", lin_var("x").add(lin_const(1))))
        assert iv.bounds(out, "x") == (0, 3)
        assert iv.bounds(out, "y") == (1, 4)

    def test_zones_closure_through_assumes(self):
        top = zn.make_top(("x", "y"), ())
        s = zn.assume(top, Cmp(lin_var("x").sub(lin_var("y")), "<=", lin_const(2)))
        s = zn.assume(s, Cmp(lin_var("y"), "<=", lin_const(3)))
        assert zn.bounds(s, "x")[1] == 5

    def test_disint_assume_filters_disjuncts(self):
        top = di.make_top(("x",), ())
        s = di.join(di.assign_interval(top, "x", 0, 1),
                    di.assign_interval(top, "x", 5, 6))
        out = di.assume(s, Cmp(lin_var("x"), ">=", lin_const(4)))
        assert out.store["x"] == ((5, 6),)

    def test_nonlinear_exact_for_constants(self):
        s = ivstate(x=(0, 0))
        from airtune.ir import BinOp
        out = iv.transfer(s, BinOp("x", lin_const(21), "*", lin_const(-3)))
        assert iv.bounds(out, "x") == (-63, -63)
        out = zn.transfer(zn.make_top(("x",), ()),
                          BinOp("x", lin_const(17), "/", lin_const(5)))
        assert zn.bounds(out, "x") == (3, 3)

    def test_havoc_sets_range(self):
        out = iv.transfer(ivstate(x=(0, 0)), Havoc("x", -2, 7))
        assert iv.bounds(out, "x") == (-2, 7)


class TestBackward:
    def test_substitution(self):
        s = ivstate(x=(-INF, INF), y=(10, 10))
        pre = iv.backward(s, Assign("y", lin_var("x").add(lin_const(1))))
        assert iv.bounds(pre, "x") == (9, 9)

    def test_bottom_preserved(self):
        assert iv.backward(BOTTOM, Assign("y", lin_var("x"))) is BOTTOM

    def test_havoc_projects(self):
        s = ivstate(x=(0, 5))
        pre = iv.backward(s, Havoc("x", 0, 100))
        assert iv.bounds(pre, "x") == (-INF, INF)

    def test_infeasible_havoc_is_bottom(self):
        s = ivstate(x=(200, 300))
        assert iv.backward(s, Havoc("x", 0, 100)) is BOTTOM


class TestReduce:
    def test_snap_endpoints(self):
        # Oracle: smallest/largest members of 4Z+1 within [0, 10].
        members = [n for n in range(0, 11) if n % 4 == 1]
        assert reduce_ric_payload(((0, 10), (4, 1))) == \
            ((min(members), max(members)), (4, 1))

    def test_empty_class_in_range(self):
        assert not [n for n in range(2, 4) if n % 4 == 1]
        assert reduce_ric_payload(((2, 3), (4, 1))) is None

    def test_bottom_component_makes_product_bottom(self):
        assert reduce_state(D.RIC, BOTTOM) is BOTTOM
        top = pz.make_top(("x",), ("b",))
        assert reduce_state(D.PROD_BOOL_ZONES, top) == top

    def test_reduce_never_enlarges(self):
        for lo in range(-6, 7):
            for hi in range(lo, 7):
                for a, b in [(0, 3), (2, 1), (3, 2), (4, 1), (1, 0)]:
                    p = reduce_ric_payload(((lo, hi), (a, b)))
                    if p is None:
                        continue
                    (lo2, hi2), cong2 = p
                    assert lo <= lo2 and hi2 <= hi
                    # gamma preserved: same members in range
                    def member(n, c):
                        return n == c[1] if c[0] == 0 else (n - c[1]) % c[0] == 0
                    before = [n for n in range(lo, hi + 1) if member(n, (a, b))]
                    after = [n for n in range(lo2, hi2 + 1) if member(n, cong2)]
                    assert before == after


class TestProduct:
    def test_guard_replay_through_assume(self):
        from airtune.ir import BoolAssign, BoolRef, Assume
        s = pz.make_top(("x",), ("b",))
        s = pz.transfer(s, Havoc("x", 0, 10))
        s = pz.transfer(s, BoolAssign("b", Cmp(lin_var("x"), "<=", lin_const(5))))
        s = pz.transfer(s, Assume(BoolRef("b")))
        assert pz.bounds(s, "x") == (0, 5)
        assert pz.entails(s, Cmp(lin_var("x"), "<=", lin_const(5)))

    def test_zone_entailment_fixes_bool(self):
        from airtune.ir import BoolAssign, BoolRef, NotE
        s = pz.make_top(("x",), ("b",))
        s = pz.transfer(s, Havoc("x", 0, 3))
        s = pz.transfer(s, BoolAssign("b", Cmp(lin_var("x"), "<=", lin_const(5))))
        assert pz.entails(s, BoolRef("b"))
        s2 = pz.transfer(s, Assign("x", lin_const(9)))
        s2 = pz.transfer(s2, BoolAssign("b", Cmp(lin_var("x"), "<=", lin_const(5))))
        assert pz.entails(s2, NotE(BoolRef("b")))

    def test_bool_domain_ignores_numeric(self):
        s = bl.make_top((), ("p",))
        out = bl.transfer(s, Assign("x", lin_const(1)))
        assert out == s
        out = bl.assume(s, Cmp(lin_var("x"), "<=", lin_const(0)))
        assert out == s


class TestComparable:
    def test_path_through_zones(self):
        p = default_poset()
        assert comparable(p, D.INTERVALS, D.OCTAGONS)

    def test_bool_incomparable_to_numeric(self):
        p = default_poset()
        assert not comparable(p, D.BOOL, D.ZONES)

    def test_reflexive_and_symmetric(self):
        p = default_poset()
        for a in p.implemented_ids():
            assert comparable(p, a, a)
            for b in p.implemented_ids():
                assert comparable(p, a, b) == comparable(p, b, a)
