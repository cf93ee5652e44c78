from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import naive_max_clique, nx_max_clique, oracle_pair, oracle_universe
from fracfam.bounds import theorem1_bound, theorem2_bound
from fracfam.core import FamilyError, LSet, Subset, is_fractional_pair, verify_family
from fracfam.search import (
    SearchLimits,
    UniverseFilter,
    build_graph,
    extremal_table,
    heuristic_grow,
    max_clique,
)

HALF = LSet([Fraction(1, 2)])
# exact bisection-closed maxima on [n]; n <= 4 from the all-subsets oracle, the rest from networkx
BISECTION_MAX = {2: 2, 3: 3, 4: 4, 5: 5, 6: 7, 7: 11, 8: 14}


class TestBuildGraph:
    def test_n2(self):
        G = build_graph(2, HALF)
        assert [Subset(v, 2).elements() for v in G.vertices] == [[1], [2], [1, 2]]
        assert sorted(G.edges()) == [(0, 2), (1, 2)]

    def test_zero_fraction_disjoint_edges(self):
        G = build_graph(3, LSet([Fraction(0)]))
        for i in range(len(G)):
            for j in range(len(G)):
                if i != j:
                    assert bool(G.adjacency[i] >> j & 1) == (G.vertices[i] & G.vertices[j] == 0)

    def test_min_size_filter(self):
        G = build_graph(3, HALF, UniverseFilter(min_size=3))
        assert G.vertices == [0b111] and G.adjacency == [0]

    def test_filters_compose(self):
        f = UniverseFilter(min_size=2, max_size=5, parity="even", size_set=(2, 3, 4))
        assert f.sizes(8) == [2, 4]

    def test_vertex_budget(self):
        with pytest.raises(FamilyError, match="budget"):
            build_graph(13, HALF, vertex_budget=5000)
        with pytest.raises(FamilyError):
            build_graph(21, HALF, UniverseFilter(size_set=(1,)))

    @pytest.mark.parametrize("L", ["1/2", "0/1,1/3", "1/3,2/3", "1/2,1/4"])
    def test_adjacency_is_oracle_faithful(self, L):
        L = LSet.parse(L)
        G = build_graph(5, L)
        for i, u in enumerate(G.vertices):
            for j, v in enumerate(G.vertices):
                expected = i != j and is_fractional_pair(Subset(u, 5), Subset(v, 5), L)[0]
                assert bool(G.adjacency[i] >> j & 1) == expected

    def test_symmetric_irreflexive(self):
        G = build_graph(5, LSet.parse("1/3,1/2"))
        for i, row in enumerate(G.adjacency):
            assert not row >> i & 1
            for j in range(len(G)):
                assert (row >> j & 1) == (G.adjacency[j] >> i & 1)


class TestMaxClique:
    def test_n2(self):
        res = max_clique(build_graph(2, HALF))
        assert res.size == 2 and res.optimal

    def test_single_vertex(self):
        res = max_clique(build_graph(3, HALF, UniverseFilter(min_size=3)))
        assert res.size == 1 and res.optimal

    def test_empty_universe(self):
        res = max_clique(build_graph(3, HALF, UniverseFilter(min_size=4)))
        assert res.size == 0 and res.optimal

    @pytest.mark.parametrize("n", [2, 3, 4])
    def test_naive_oracle(self, n):
        assert max_clique(build_graph(n, HALF)).size == naive_max_clique(oracle_universe(n), [Fraction(1, 2)])

    @pytest.mark.parametrize("n,expected", sorted(BISECTION_MAX.items()))
    def test_pinned(self, n, expected):
        res = max_clique(build_graph(n, HALF))
        assert res.size == expected and res.optimal
        assert verify_family(res.best_family, HALF).valid

    def test_pins_agree_with_networkx(self):
        for n in range(2, 8):
            assert nx_max_clique(oracle_universe(n), [Fraction(1, 2)]) == BISECTION_MAX[n]

    @pytest.mark.parametrize("L", ["0/1", "1/3,2/3", "1/2,1/3", "0/1,1/2", "1/4,3/4"])
    @pytest.mark.parametrize("n", [3, 4])
    def test_other_L_against_naive(self, n, L):
        L = LSet.parse(L)
        assert max_clique(build_graph(n, L)).size == naive_max_clique(oracle_universe(n), L.fractions)

    @pytest.mark.parametrize("L", ["1/3", "1/2,1/3", "0/1,2/5"])
    def test_other_L_against_networkx(self, L):
        L = LSet.parse(L)
        res = max_clique(build_graph(6, L))
        assert res.size == nx_max_clique(oracle_universe(6), L.fractions)
        assert verify_family(res.best_family, L).valid

    @pytest.mark.parametrize("threads", [1, 2, 8])
    def test_thread_invariant(self, threads):
        assert max_clique(build_graph(7, HALF), threads=threads).size == 11

    def test_node_limit_flags_result(self):
        res = max_clique(build_graph(8, HALF), SearchLimits(node_limit=5))
        assert not res.optimal and "node_limit" in res.limits_hit
        assert verify_family(res.best_family, HALF).valid

    def test_theorem3_cap(self):
        for n in range(4, 9):
            res = max_clique(build_graph(n, HALF, UniverseFilter(min_size=n // 2 + 1)))
            assert res.optimal and res.size <= n

    def test_monotone_filters(self):
        full = max_clique(build_graph(6, HALF)).size
        for f in (UniverseFilter(min_size=2), UniverseFilter(parity="even"), UniverseFilter(max_size=3)):
            assert max_clique(build_graph(6, HALF, f)).size <= full


@st.composite
def small_universes(draw):
    n = draw(st.integers(2, 6))
    sizes = draw(st.sets(st.integers(1, n), min_size=1))
    fracs = draw(st.sets(st.sampled_from([Fraction(0), Fraction(1, 2), Fraction(1, 3),
                                          Fraction(2, 3), Fraction(1, 4)]), min_size=1, max_size=2))
    return n, tuple(sorted(sizes)), LSet(fracs)


@settings(max_examples=60, deadline=None)
@given(small_universes())
def test_clique_matches_oracle_on_small_universes(data):
    n, sizes, L = data
    flt = UniverseFilter(size_set=sizes)
    U = oracle_universe(n, sizes)
    G = build_graph(n, L, flt)
    res = max_clique(G)
    expect = naive_max_clique(U, L.fractions) if len(U) <= 14 else nx_max_clique(U, L.fractions)
    assert res.size == expect
    assert verify_family(res.best_family, L).valid


class TestHeuristic:
    def test_n8(self):
        res = heuristic_grow(8, HALF, seed=1, budget=200)
        assert res.size >= 10 and not res.optimal
        assert verify_family(res.best_family, HALF).valid

    def test_n16(self):
        res = heuristic_grow(16, HALF, seed=3, budget=50)
        assert res.size >= 22
        assert verify_family(res.best_family, HALF).valid

    def test_budget_zero(self):
        res = heuristic_grow(10, HALF, seed=0, budget=0)
        assert verify_family(res.best_family, HALF).valid and res.size >= 13

    def test_reproducible(self):
        a = heuristic_grow(9, LSet.parse("1/3,1/2"), seed=5, budget=100)
        b = heuristic_grow(9, LSet.parse("1/3,1/2"), seed=5, budget=100)
        assert a.best_family == b.best_family

    def test_large_n_pool(self):
        res = heuristic_grow(30, HALF, seed=2, budget=20, pool_size=2000)
        assert res.size >= 43 and verify_family(res.best_family, HALF).valid

    def test_filter_respected(self):
        res = heuristic_grow(9, HALF, seed=4, budget=50, filter=UniverseFilter(parity="even"))
        assert all(s.size % 2 == 0 for s in res.best_family)
        assert verify_family(res.best_family, HALF).valid


class TestTable:
    def test_rows(self):
        rows = extremal_table(range(4, 7), HALF)
        assert [r["size"] for r in rows] == [4, 5, 7]
        for r in rows:
            assert r["optimal"]
            assert r["size"] <= theorem2_bound(r["n"], Fraction(1, 2)) == r["theorem2"]
            assert r["size"] <= theorem1_bound(r["n"], HALF).exact_prime_bound
            if r["n"] % 2 == 0:
                assert r["attains_construction"]

    def test_falls_back_to_heuristic(self):
        rows = extremal_table([14], HALF, heuristic_budget=10)
        assert rows[0]["method"] == "heuristic" and not rows[0]["optimal"]
