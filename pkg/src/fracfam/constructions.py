"""Explicit families: the tightness examples, the bisection-closed examples,
the large even-set avoiding family and random approximate families."""
from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from math import comb

import numpy as np

from .core import Family, FamilyError, LSet, Subset, VerificationReport, is_avoiding, verify_family

__all__ = [
    "EXHAUSTIVE_MAX_N",
    "ConstructionOutput",
    "farey_fractions",
    "example1_family",
    "uniform_family",
    "star_block_family",
    "sylvester_hadamard",
    "hadamard_matrix_M",
    "hadamard_family",
    "avoiding_family",
    "avoiding_count",
    "random_approx_family",
    "approx_verify",
    "approx_success_rate",
]

EXHAUSTIVE_MAX_N = 24
HALF = Fraction(1, 2)


@dataclass
class ConstructionOutput:
    family: Family
    intended_L: LSet | None
    claimed_size: int
    verified: VerificationReport | None = None
    avoiding: bool | None = None

    def __post_init__(self):
        if len(self.family) != self.claimed_size:
            raise AssertionError(
                f"construction produced {len(self.family)} sets, claimed {self.claimed_size}"
            )

    def verify(self) -> "ConstructionOutput":
        if self.intended_L is not None:
            self.verified = verify_family(self.family, self.intended_L)
        else:
            self.avoiding = is_avoiding(self.family)
        return self


def _cap(n: int):
    if n > EXHAUSTIVE_MAX_N:
        raise FamilyError(f"n={n} exceeds the exhaustive generator cap {EXHAUSTIVE_MAX_N}")


def farey_fractions(d: int) -> list[Fraction]:
    """All irreducible fractions in [0, 1) with denominator at most ``d``."""
    return sorted({Fraction(a, b) for b in range(1, d + 1) for a in range(b)})


def _all_of_size(n: int, k: int):
    for c in combinations(range(n), k):
        m = 0
        for e in c:
            m |= 1 << e
        yield m


def example1_family(n: int, c: int = 0) -> ConstructionOutput:
    """All non-empty subsets of size at most ``n - c``, with every fraction of denominator <= n - c."""
    if n < 1 or c < 0 or c >= n:
        raise FamilyError("need n >= 1 and 0 <= c < n")
    _cap(n)
    top = n - c
    masks = [m for k in range(1, top + 1) for m in _all_of_size(n, k)]
    claimed = sum(comb(n, k) for k in range(1, top + 1))
    return ConstructionOutput(Family.from_masks(masks, n), LSet(farey_fractions(top)), claimed)


def uniform_family(n: int, s: int) -> ConstructionOutput:
    if not 1 <= s <= n:
        raise FamilyError("need 1 <= s <= n")
    _cap(n)
    L = LSet(Fraction(j, s) for j in range(s))
    return ConstructionOutput(Family.from_masks(_all_of_size(n, s), n), L, comb(n, s))


def star_block_family(n: int) -> ConstructionOutput:
    """Pairs through 1 plus 4-sets through {1, 2}; bisection closed, 3n/2 - 2 sets."""
    if n % 2 or n < 4:
        raise FamilyError("star-block needs an even n >= 4")
    sets = [[1, i] for i in range(2, n + 1)]
    sets += [[1, 2, 2 * j - 1, 2 * j] for j in range(2, n // 2 + 1)]
    return ConstructionOutput(Family.from_sets(sets, n), LSet([HALF]), 3 * n // 2 - 2)


def sylvester_hadamard(k: int) -> np.ndarray:
    """``H(k)`` of order ``2**k`` by the doubling rule, ``H(0) = [1]``."""
    H = np.ones((1, 1), dtype=np.int8)
    for _ in range(k):
        H = np.block([[H, H], [H, -H]])
    return H


def hadamard_matrix_M(k: int) -> np.ndarray:
    """Stack ``[H H; H -H; H J]`` with ``H = H(k-1)``: a ``3*2**(k-1)`` by ``2**k`` sign matrix."""
    if k < 1:
        raise FamilyError("need k >= 1")
    H = sylvester_hadamard(k - 1)
    J = np.ones_like(H)
    return np.block([[H, H], [H, -H], [H, J]])


def hadamard_family(k: int) -> ConstructionOutput:
    """Rows of ``M(k)`` minus rows 1 and ``2**k + 1`` (1-based); -1 entries become members.

    The result is not verified here; call ``.verify()`` to run the pairwise check.
    """
    if k < 2:
        raise FamilyError("need k >= 2")
    n = 2 ** k
    M = hadamard_matrix_M(k)
    keep = [r for r in range(M.shape[0]) if r not in (0, n)]
    masks = []
    for r in keep:
        cols = np.flatnonzero(M[r] == -1)
        masks.append(sum(1 << int(c) for c in cols))
    return ConstructionOutput(Family.from_masks(masks, n), LSet([HALF]), 3 * n // 2 - 2)


def _even_sizes_above(n: int) -> list[int]:
    # even j with 3j > 2n
    return [j for j in range(0, n + 1, 2) if 3 * j > 2 * n]


def avoiding_count(n: int) -> int:
    return sum(comb(n, j) for j in _even_sizes_above(n))


def avoiding_family(n: int) -> ConstructionOutput:
    """Every even-sized subset larger than ``2n/3``."""
    if n < 3:
        raise FamilyError("need n >= 3")
    _cap(n)
    masks = [m for j in _even_sizes_above(n) for m in _all_of_size(n, j)]
    return ConstructionOutput(Family.from_masks(masks, n), None, avoiding_count(n))


def random_approx_family(n: int, m: int, seed: int) -> Family:
    """``m`` distinct non-empty subsets of ``[n]``, each uniform over all subsets.

    Uses ``random.Random(seed)``; empty and repeated draws are re-drawn.
    """
    if m < 1 or n < 1:
        raise FamilyError("need n >= 1 and m >= 1")
    if m > 2 ** n - 1:
        raise FamilyError(f"cannot draw {m} distinct non-empty subsets of [{n}]")
    rng = random.Random(seed)
    seen: set[int] = set()
    out = []
    while len(out) < m:
        x = rng.getrandbits(n)
        if x == 0 or x in seen:
            continue
        seen.add(x)
        out.append(x)
    return Family.from_masks(out, n)


def _check_eps(eps: Fraction) -> Fraction:
    eps = Fraction(eps)
    if not 0 < eps < HALF:
        raise FamilyError(f"epsilon must lie in (0, 1/2), got {eps}")
    return eps


def approx_verify(F: Family, eps: Fraction) -> VerificationReport:
    """Pairs pass when ``|A&B|/|A|`` or ``|A&B|/|B|`` lies strictly within ``eps`` of 1/2."""
    eps = _check_eps(eps)
    lo, hi = HALF - eps, HALF + eps
    masks = F.masks
    sizes = [mk.bit_count() for mk in masks]
    if 0 in sizes:
        raise FamilyError("approximate check is undefined for the empty set")
    bad = []
    for i, j in combinations(range(len(masks)), 2):
        k = (masks[i] & masks[j]).bit_count()
        if not (lo < Fraction(k, sizes[i]) < hi or lo < Fraction(k, sizes[j]) < hi):
            bad.append((i, j))
    return VerificationReport(not bad, tuple(bad))


def approx_success_rate(n: int, eps: Fraction, m: int, trials: int, seed: int) -> dict:
    """Fraction of seeded random families of size ``m`` that pass ``approx_verify``.

    Trial ``k`` uses seed ``seed + k``.  The target size ``exp(2 eps^2 n / 75)`` is
    reported alongside for comparison only.
    """
    import math

    eps = _check_eps(eps)
    ok = sum(approx_verify(random_approx_family(n, m, seed + k), eps).valid for k in range(trials))
    return {
        "n": n,
        "eps": str(eps),
        "m": m,
        "trials": trials,
        "seed": seed,
        "successes": ok,
        "frequency": ok / trials if trials else 0.0,
        "target_size": math.exp(2 * float(eps) ** 2 * n / 75),
    }
