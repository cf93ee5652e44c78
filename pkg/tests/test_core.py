from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import oracle_valid, oracle_violations
from fracfam.constructions import avoiding_family, star_block_family, uniform_family
from fracfam.core import (
    Family,
    FamilyError,
    LSet,
    Subset,
    induced_classical_L,
    is_avoiding,
    is_fractional_pair,
    make_fraction,
    uniformity,
    verify_family,
)

HALF = LSet([Fraction(1, 2)])


def S(*elems, n=8):
    return Subset.from_elements(elems, n)


class TestFraction:
    def test_reduced(self):
        assert make_fraction(1, 2) == Fraction(1, 2)
        assert make_fraction(2, 4) == Fraction(1, 2)

    def test_zero_is_canonical(self):
        z = make_fraction(0, 7)
        assert (z.numerator, z.denominator) == (0, 1)

    @pytest.mark.parametrize("a,b", [(3, 2), (1, 1), (1, 0), (-1, 2)])
    def test_rejects(self, a, b):
        with pytest.raises(FamilyError):
            make_fraction(a, b)


class TestLSet:
    def test_parse(self):
        L = LSet.parse("1/2, 1/3,0/1")
        assert L.fractions == (Fraction(0), Fraction(1, 3), Fraction(1, 2))
        assert L.s == 3 and L.t == 3

    def test_duplicates_after_reduction_rejected(self):
        with pytest.raises(FamilyError):
            LSet.parse("1/2,2/4")

    def test_empty_rejected(self):
        with pytest.raises(FamilyError):
            LSet([])


class TestSubsetAndFamily:
    def test_elements_round_trip(self):
        assert S(1, 3, 8).elements() == [1, 3, 8]
        assert S(1, 3, 8).size == 3

    def test_out_of_range(self):
        with pytest.raises(FamilyError):
            Subset.from_elements([9], 8)
        with pytest.raises(FamilyError):
            Subset(1 << 8, 8)

    def test_wide_ground_set(self):
        A = Subset.from_elements([1, 100, 200], 200)
        B = Subset.from_elements([100, 200], 200)
        assert A.intersection_size(B) == 2

    def test_canonical_order(self):
        F = Family.from_sets([[1, 2, 3], [2], [1, 3], [1]], 3)
        assert F.as_lists() == [[1], [2], [1, 3], [1, 2, 3]]

    def test_duplicates_rejected(self):
        with pytest.raises(FamilyError):
            Family.from_sets([[1, 2], [2, 1]], 3)

    def test_mixed_ground_sets_rejected(self):
        with pytest.raises(FamilyError):
            Family(4, [Subset.from_elements([1], 4), Subset.from_elements([1], 5)])


class TestPair:
    def test_half(self):
        ok, w = is_fractional_pair(S(1, 2), S(1, 3), HALF)
        assert ok and w == Fraction(1, 2)

    def test_zero_fraction_disjoint(self):
        ok, w = is_fractional_pair(S(1), S(2), LSet([Fraction(0)]))
        assert ok and w == 0

    def test_disjoint_fails_for_half(self):
        assert is_fractional_pair(S(1, 2), S(3, 4), HALF) == (False, None)

    def test_equal_sets_rejected(self):
        with pytest.raises(FamilyError):
            is_fractional_pair(S(1, 2), S(1, 2), HALF)

    def test_thirds_are_exact(self):
        # 1 = (1/3) * 3 exactly; floats would also pass here but 2/3 * 3 is the classic trap
        L = LSet([Fraction(2, 3)])
        assert is_fractional_pair(S(1, 2, 3), S(1, 2, 4, 5, 6, 7), L)[0]


class TestVerify:
    def test_star_block_8(self):
        rep = verify_family(star_block_family(8).family, HALF)
        assert rep.valid and rep.violations == ()

    def test_single_member(self):
        assert verify_family(Family.from_sets([[1]], 2), HALF).valid

    def test_disjoint_pair(self):
        rep = verify_family(Family.from_sets([[1, 2], [3, 4]], 4), HALF)
        assert not rep.valid
        assert rep.to_dict()["violations"] == [[1, 2]]

    def test_witnesses_cover_valid_pairs(self):
        F = star_block_family(6).family
        rep = verify_family(F, HALF)
        assert len(rep.pair_witnesses) == len(F) * (len(F) - 1) // 2


class TestAvoiding:
    def test_disjoint(self):
        assert is_avoiding(Family.from_sets([[1, 2], [3, 4]], 4))

    def test_bisecting(self):
        assert not is_avoiding(Family.from_sets([[1, 2], [1, 3]], 4))

    def test_odd_member_named(self):
        with pytest.raises(FamilyError, match=r"\{1,2,3\}"):
            is_avoiding(Family.from_sets([[1, 2], [1, 2, 3]], 4))

    def test_avoiding_family_9_brute_force(self):
        F = avoiding_family(9).family
        sets = [frozenset(x) for x in F.as_lists()]
        brute = all(
            2 * len(A & B) not in (len(A), len(B)) for i, A in enumerate(sets) for B in sets[i + 1:]
        )
        assert brute and is_avoiding(F)


class TestUniformity:
    def test_uniform(self):
        assert uniformity(uniform_family(4, 2).family) == 2
        assert uniformity(uniform_family(5, 3).family) == 3

    def test_not_uniform(self):
        assert uniformity(Family.from_sets([[1], [1, 2]], 2)) is None

    def test_induced(self):
        assert induced_classical_L(4, HALF) == [2]
        assert induced_classical_L(5, LSet.parse("1/2,1/3")) == [1, 2]
        assert induced_classical_L(3, LSet.parse("0/1")) == [0]


# -- properties --------------------------------------------------------------

fractions_st = st.builds(
    lambda b, a: Fraction(a % b, b), st.integers(1, 5), st.integers(0, 4)
)
lsets = st.sets(fractions_st, min_size=1, max_size=3).map(LSet)


@st.composite
def families(draw, max_n=6):
    n = draw(st.integers(1, max_n))
    masks = draw(st.sets(st.integers(1, 2 ** n - 1), min_size=1, max_size=8))
    return Family.from_masks(masks, n)


@settings(max_examples=200, deadline=None)
@given(families(), lsets)
def test_verify_matches_pairwise_oracle(F, L):
    rep = verify_family(F, L)
    assert rep.valid == oracle_valid(F.as_lists(), L.fractions)
    assert list(rep.violations) == oracle_violations(F.as_lists(), L.fractions)


@settings(max_examples=100, deadline=None)
@given(families(), lsets, st.randoms(use_true_random=False))
def test_relabeling_invariance(F, L, rnd):
    perm = list(range(1, F.ground_n + 1))
    rnd.shuffle(perm)
    assert verify_family(F.permuted(perm), L).valid == verify_family(F, L).valid


@settings(max_examples=200, deadline=None)
@given(families(), lsets)
def test_pair_symmetry(F, L):
    for i, A in enumerate(F.members):
        for B in F.members[i + 1:]:
            assert is_fractional_pair(A, B, L)[0] == is_fractional_pair(B, A, L)[0]


@settings(max_examples=200, deadline=None)
@given(families(), lsets)
def test_uniform_reduction(F, L):
    t = uniformity(F)
    if t is None or not verify_family(F, L).valid:
        return
    allowed = set(induced_classical_L(t, L))
    for i, A in enumerate(F.members):
        for B in F.members[i + 1:]:
            assert A.intersection_size(B) in allowed


@settings(max_examples=300, deadline=None)
@given(families(max_n=7), st.integers(2, 5), st.integers(1, 4))
def test_singleton_divisibility(F, b, a):
    frac = Fraction(a % b, b)
    if frac == 0:
        return
    L = LSet([frac])
    if verify_family(F, L).valid:
        assert sum(1 for s in F.members if s.size % frac.denominator) <= 1


@settings(max_examples=150, deadline=None)
@given(families(max_n=7))
def test_avoiding_matches_brute_force(F):
    even = Family(F.ground_n, [s for s in F.members if s.size % 2 == 0])
    sets = [frozenset(x) for x in even.as_lists()]
    brute = all(
        2 * len(A & B) not in (len(A), len(B)) for i, A in enumerate(sets) for B in sets[i + 1:]
    )
    assert is_avoiding(even) == brute
