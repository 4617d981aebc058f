"""Precision-poset structure, file parsing, and restriction."""

import itertools

import pytest

from airtune.domains import (DomainId, PosetError, default_poset,
                             domain_from_token, parse_poset)

D = DomainId


def brute_force_antichains(poset, size):
    impl = poset.implemented_ids()
    return [combo for combo in itertools.combinations(impl, size)
            if all(not poset.comparable(a, b)
                   for a, b in itertools.combinations(combo, 2))]


class TestDefaultPoset:
    def test_incomparable_pairs_fixture(self):
        p = default_poset()
        impl = p.implemented_ids()
        incomparable = {frozenset((a, b))
                        for a, b in itertools.combinations(impl, 2)
                        if not p.comparable(a, b)}
        expected = {frozenset(pair) for pair in [
            (D.BOOL, D.INTERVALS), (D.BOOL, D.RIC), (D.BOOL, D.DISINT),
            (D.BOOL, D.ZONES), (D.BOOL, D.OCTAGONS),
            (D.RIC, D.DISINT), (D.RIC, D.ZONES), (D.RIC, D.OCTAGONS),
            (D.DISINT, D.ZONES), (D.DISINT, D.OCTAGONS),
            (D.PROD_BOOL_ZONES, D.RIC), (D.PROD_BOOL_ZONES, D.DISINT),
            # above zones on separate branches, hence incomparable:
            (D.PROD_BOOL_ZONES, D.OCTAGONS),
        ]}
        assert incomparable == expected

    def test_declared_unimplemented(self):
        p = default_poset()
        assert D.POLYHEDRA in p
        assert D.POLYHEDRA not in p.implemented
        assert p.comparable(D.ZONES, D.POLYHEDRA)

    def test_maximal_implemented(self):
        p = default_poset()
        assert set(p.maximal_implemented()) == \
            {D.RIC, D.DISINT, D.OCTAGONS, D.PROD_BOOL_ZONES}

    def test_immediate_successors_not_transitive(self):
        p = default_poset()
        assert set(p.immediate_successors(D.INTERVALS)) == \
            {D.RIC, D.DISINT, D.ZONES}
        assert D.OCTAGONS not in p.immediate_successors(D.INTERVALS)

    def test_max_antichain_size(self):
        # Brute-force oracle over all subsets of implemented ids.
        p = default_poset()
        assert brute_force_antichains(p, 4)
        assert not brute_force_antichains(p, 5)


class TestPosetFiles:
    def test_roundtrip_custom(self):
        p = parse_poset("""
domain bool
domain intervals
domain zones
intervals < zones
""")
        assert p.comparable(D.INTERVALS, D.ZONES)
        assert not p.comparable(D.BOOL, D.ZONES)
        assert set(p.implemented_ids()) == {D.BOOL, D.INTERVALS, D.ZONES}

    def test_cycle_rejected(self):
        with pytest.raises(PosetError, match="cycle"):
            parse_poset("""
domain intervals
domain zones
intervals < zones
zones < intervals
""")

    def test_unknown_domain_rejected(self):
        with pytest.raises(PosetError):
            parse_poset("domain pentagons\n")

    def test_unimplementable_cannot_be_marked_implemented(self):
        with pytest.raises(PosetError, match="cannot mark"):
            parse_poset("domain polyhedra\n")

    def test_edge_with_undeclared_domain(self):
        with pytest.raises(PosetError, match="undeclared"):
            parse_poset("domain intervals\nintervals < zones\n")


class TestRestriction:
    def test_induced_covers(self):
        p = default_poset()
        sub = p.restrict({D.INTERVALS, D.OCTAGONS, D.BOOL})
        # zones dropped: intervals -> octagons becomes a cover edge
        assert set(sub.immediate_successors(D.INTERVALS)) == {D.OCTAGONS}
        assert not sub.comparable(D.BOOL, D.OCTAGONS)

    def test_minimal_of_subset(self):
        p = default_poset()
        assert set(p.minimal_of([D.RIC, D.DISINT, D.ZONES, D.OCTAGONS])) == \
            {D.RIC, D.DISINT, D.ZONES}

    def test_token_lookup(self):
        assert domain_from_token("prod(bool,zones)") is D.PROD_BOOL_ZONES
        with pytest.raises(Exception):
            domain_from_token("prod(bool, zones)")
