"""Exact linear algebra over Q and F_p for the rank arguments behind the bounds."""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, product
from math import lcm
from typing import Sequence

import numpy as np
from sympy import isprime, primerange

from .bounds import prime_window, theorem4_window
from .core import Family, FamilyError, LSet, verify_family

__all__ = [
    "AlgebraError",
    "rank_rational",
    "rank_mod_p",
    "evaluation_matrix",
    "monomial_coefficients",
    "IndependenceReport",
    "independence_check",
    "swallow_check",
    "residue_classes",
    "admissible_primes",
    "gram_pm1",
    "gram_scaled",
    "GramReport",
    "alon_rank_check",
    "AlonReport",
    "ChoiceMatrixInstance",
    "family_to_choice_matrix",
    "min_rank_choice",
    "EVAL_MAX_N",
    "EXHAUSTIVE_CHOICE_MAX_N",
]

EVAL_MAX_N = 20
EXHAUSTIVE_CHOICE_MAX_N = 7


class AlgebraError(ValueError):
    pass


def _bareiss_rank(rows: list[list[int]]) -> int:
    """Rank of an integer matrix by fraction-free elimination."""
    A = [list(r) for r in rows]
    if not A or not A[0]:
        return 0
    m, n = len(A), len(A[0])
    rank, prev = 0, 1
    for col in range(n):
        if rank == m:
            break
        piv = next((r for r in range(rank, m) if A[r][col]), None)
        if piv is None:
            continue
        A[rank], A[piv] = A[piv], A[rank]
        p = A[rank][col]
        for r in range(rank + 1, m):
            x = A[r][col]
            Ar, Ak = A[r], A[rank]
            for c in range(col + 1, n):
                Ar[c] = (p * Ar[c] - x * Ak[c]) // prev
            Ar[col] = 0
        prev = p
        rank += 1
    return rank


def rank_rational(M: Sequence[Sequence]) -> int:
    """Exact rank over Q; each row is scaled to integers before elimination."""
    rows = []
    for row in M:
        row = [Fraction(x) for x in row]
        d = lcm(*(x.denominator for x in row)) if row else 1
        rows.append([int(x * d) for x in row])
    return _bareiss_rank(rows)


def rank_mod_p(M: Sequence[Sequence[int]], p: int) -> int:
    """Exact rank over the prime field F_p."""
    if not isprime(p):
        raise AlgebraError(f"modulus {p} is not prime")
    A = np.array(M, dtype=np.int64) % p if len(M) else np.zeros((0, 0), dtype=np.int64)
    if A.ndim != 2 or A.size == 0:
        return 0
    A = A.copy()
    m, n = A.shape
    rank = 0
    for col in range(n):
        if rank == m:
            break
        nz = np.flatnonzero(A[rank:, col])
        if nz.size == 0:
            continue
        piv = rank + int(nz[0])
        if piv != rank:
            A[[rank, piv]] = A[[piv, rank]]
        inv = pow(int(A[rank, col]), -1, p)
        A[rank] = (A[rank] * inv) % p
        below = A[rank + 1:, col].copy()
        if below.any():
            A[rank + 1:] = (A[rank + 1:] - np.outer(below, A[rank])) % p
        rank += 1
    return rank


# -- evaluation-matrix machinery over {0,1}^n ---------------------------------

def _popcounts(n: int) -> np.ndarray:
    return np.bitwise_count(np.arange(2 ** n, dtype=np.uint64)).astype(np.int64)


def evaluation_matrix(polys: list[tuple[int, list[int]]], n: int, p: int) -> np.ndarray:
    """Rows ``x -> prod_l (<V, x> - r_l) mod p`` over all ``x`` in {0,1}^n.

    Each entry of ``polys`` is ``(mask of V, roots r_l)``.
    """
    if n > EVAL_MAX_N:
        raise AlgebraError(f"n={n} exceeds the evaluation cap {EVAL_MAX_N}")
    pts = np.arange(2 ** n, dtype=np.uint64)
    out = np.empty((len(polys), 2 ** n), dtype=np.int64)
    for r, (mask, roots) in enumerate(polys):
        dot = np.bitwise_count(pts & np.uint64(mask)).astype(np.int64)
        val = np.ones(2 ** n, dtype=np.int64)
        for root in roots:
            val = (val * ((dot - root) % p)) % p
        out[r] = val
    return out


def monomial_coefficients(values: np.ndarray, n: int, p: int) -> np.ndarray:
    """Multilinear coefficients (indexed by monomial mask) of a function on {0,1}^n.

    Inverse subset-sum transform; ``coef[S] = sum_{T <= S} (-1)^{|S-T|} f(T)``.
    """
    c = np.array(values, dtype=np.int64) % p
    c = c.reshape(-1, 2 ** n) if c.ndim == 1 else c.copy()
    for bit in range(n):
        step = 1 << bit
        idx = np.arange(2 ** n)
        hi = idx[(idx & step) != 0]
        c[:, hi] = (c[:, hi] - c[:, hi ^ step]) % p
    return c


@dataclass
class IndependenceReport:
    p: int
    residue: int
    m: int
    rank: int
    independent: bool
    diagonal_pattern: bool
    multipliers: int = 0
    max_degree: int | None = None
    basis: str = "evaluation"

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def _roots(L: LSet, i: int, p: int) -> list[int]:
    out = []
    for f in L.fractions:
        a, b = f.numerator, f.denominator
        if b % p == 0:
            raise AlgebraError(f"p={p} divides denominator {b}; cannot invert")
        out.append(a * pow(b, -1, p) * i % p)
    return out


def _check_class(F_i: Family, L: LSet, i: int, p: int):
    if not isprime(p):
        raise AlgebraError(f"modulus {p} is not prime")
    if p <= L.t:
        raise AlgebraError(f"need p > t = {L.t}, got p={p}")
    if i % p == 0:
        raise AlgebraError("residue 0 is excluded")
    for s in F_i.members:
        if (s.size - i) % p:
            raise AlgebraError(f"member {s!r} has size {s.size}, not {i} mod {p}")


def _rank_and_degree(rows: np.ndarray, n: int, p: int, basis: str):
    if basis == "evaluation":
        return rank_mod_p(rows.tolist(), p), None
    if basis == "monomial":
        coef = monomial_coefficients(rows, n, p)
        used = np.flatnonzero(coef.any(axis=0))
        deg = int(np.bitwise_count(used.astype(np.uint64)).max()) if used.size else 0
        return rank_mod_p(coef[:, used].tolist(), p), deg
    raise ValueError(f"unknown basis {basis!r}")


def independence_check(
    F_i: Family, L: LSet, i: int, p: int, basis: str = "evaluation"
) -> IndependenceReport:
    """Rank of the polynomials ``f_j(x) = prod_l (<V_j, x> - (a_l/b_l) i)`` over F_p.

    Every member of ``F_i`` must have size congruent to ``i`` mod ``p``.
    ``basis="monomial"`` ranks the multilinear coefficient vectors instead of
    the evaluation vectors and also reports the top degree present.
    """
    _check_class(F_i, L, i, p)
    n = F_i.ground_n
    roots = _roots(L, i, p)
    rows = evaluation_matrix([(mk, roots) for mk in F_i.masks], n, p)
    masks = F_i.masks
    diag = all(
        (rows[j, masks[k]] != 0) == (j == k) for j in range(len(masks)) for k in range(len(masks))
    )
    rank, deg = _rank_and_degree(rows, n, p, basis)
    return IndependenceReport(p, i % p, len(masks), rank, rank == len(masks), diag,
                              max_degree=deg, basis=basis)


def swallow_check(
    F_i: Family, L: LSet, i: int, p: int, include_empty: bool = True, basis: str = "evaluation"
) -> IndependenceReport:
    """Joint rank of ``{f_j}`` and ``{x_A (sum x - i) : |A| < s, |A| != i mod p}``.

    ``include_empty=False`` drops the ``A = {}`` multiplier (only sizes 1..s-1).
    ``independent`` is true when the joint rank equals ``m`` plus the number of
    multipliers.
    """
    _check_class(F_i, L, i, p)
    n, s = F_i.ground_n, L.s
    roots = _roots(L, i, p)
    fj = evaluation_matrix([(mk, roots) for mk in F_i.masks], n, p)
    sizes = _popcounts(n)
    lin = (sizes - i) % p
    pts = np.arange(2 ** n, dtype=np.int64)
    extra = []
    lo = 0 if include_empty else 1
    for k in range(lo, s):
        if (k - i) % p == 0:
            continue
        for c in combinations(range(n), k):
            A = sum(1 << e for e in c)
            extra.append(np.where((pts & A) == A, lin, 0))
    rows = np.vstack([fj] + extra) if extra else fj
    rank, deg = _rank_and_degree(rows, n, p, basis)
    m = len(F_i)
    expected = m + len(extra)
    masks = F_i.masks
    diag = all(
        (fj[j, masks[k]] != 0) == (j == k) for j in range(m) for k in range(m)
    )
    return IndependenceReport(p, i % p, m, rank, rank == expected, diag,
                              multipliers=len(extra), max_degree=deg, basis=basis)


def residue_classes(F: Family, p: int) -> dict[int, Family]:
    """Non-empty classes ``F_i = {A : |A| = i mod p}`` for ``i != 0``."""
    groups: dict[int, list] = {}
    for s in F.members:
        r = s.size % p
        if r:
            groups.setdefault(r, []).append(s)
    return {r: Family(F.ground_n, g) for r, g in sorted(groups.items())}


def admissible_primes(L: LSet, n: int) -> list[int]:
    """Primes ``p > t`` worth checking on ``[n]``: those up to ``n + 1`` plus the prime window.

    Beyond ``n`` every class is a single size, so larger primes add nothing new.
    """
    t = L.t
    return sorted(set(int(p) for p in primerange(t + 1, n + 2)) | set(prime_window(t, max(n, 1))))


# -- Gram matrices ------------------------------------------------------------

def gram_pm1(F: Family) -> list[list[Fraction]]:
    """Inner products of the +1/-1 incidence vectors."""
    n = F.ground_n
    masks, sizes = F.masks, [s.size for s in F.members]
    return [
        [Fraction(n - 2 * sizes[x] - 2 * sizes[y] + 4 * (masks[x] & masks[y]).bit_count())
         for y in range(len(masks))]
        for x in range(len(masks))
    ]


@dataclass
class GramReport:
    matrix: list[list[Fraction]]
    unit_diagonal: bool
    off_diagonal_ok: bool
    max_off_diagonal_sq: Fraction
    limit_sq: Fraction
    rank: int

    @property
    def ok(self) -> bool:
        return self.unit_diagonal and self.off_diagonal_ok


def gram_scaled(F: Family, delta: Fraction, frac: Fraction = Fraction(1, 2)) -> GramReport:
    """Gram matrix of the vectors ``+-1/sqrt(n)``, checked against ``1/(delta sqrt(n))``.

    All members must lie in the size window for ``frac`` and ``delta``.
    """
    n = F.ground_n
    delta = Fraction(delta)
    window = set(theorem4_window(n, frac, delta))
    for s in F.members:
        if s.size not in window:
            raise AlgebraError(f"member {s!r} of size {s.size} is outside the size window")
    G = [[x / n for x in row] for row in gram_pm1(F)]
    m = len(G)
    limit_sq = 1 / (delta * delta * n)
    off = [G[x][y] ** 2 for x in range(m) for y in range(m) if x != y]
    worst = max(off, default=Fraction(0))
    return GramReport(
        matrix=G,
        unit_diagonal=all(G[x][x] == 1 for x in range(m)),
        off_diagonal_ok=worst <= limit_sq,
        max_off_diagonal_sq=worst,
        limit_sq=limit_sq,
        rank=rank_rational(G),
    )


@dataclass
class AlonReport:
    hypotheses_ok: bool
    rank: int
    trace_ratio: Fraction
    lower: Fraction
    holds: bool
    problems: list[str] = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.holds


def alon_rank_check(M: Sequence[Sequence], eps: Fraction) -> AlonReport:
    """Check ``rank >= tr(M)^2 / tr(M^2) >= m / (1 + (m - 1) eps^2)`` exactly."""
    A = [[Fraction(x) for x in row] for row in M]
    eps = Fraction(eps)
    m = len(A)
    problems = []
    if any(len(row) != m for row in A):
        problems.append("not square")
    else:
        if any(A[x][y] != A[y][x] for x in range(m) for y in range(x)):
            problems.append("not symmetric")
        if any(A[x][x] != 1 for x in range(m)):
            problems.append("diagonal not all ones")
        if any(abs(A[x][y]) > eps for x in range(m) for y in range(m) if x != y):
            problems.append("off-diagonal exceeds eps")
    if problems:
        return AlonReport(False, 0, Fraction(0), Fraction(0), False, problems)
    r = rank_rational(A)
    tr = sum(A[x][x] for x in range(m))
    tr2 = sum(v * v for row in A for v in row)  # tr(A^2) for symmetric A
    ratio = tr * tr / tr2 if tr2 else Fraction(0)
    lower = Fraction(m) / (1 + (m - 1) * eps * eps) if m else Fraction(0)
    return AlonReport(True, r, ratio, lower, r >= ratio >= lower)


# -- choice matrices ----------------------------------------------------------

@dataclass(frozen=True)
class ChoiceMatrixInstance:
    """Symmetric, zero diagonal, entry ``{i, j}`` equal to ``values[i]`` or ``values[j]``."""

    values: tuple
    matrix: tuple[tuple, ...]

    def __post_init__(self):
        v, X = self.values, self.matrix
        m = len(v)
        if len(X) != m or any(len(row) != m for row in X):
            raise AlgebraError("matrix shape does not match values")
        if any(x <= 0 for x in v):
            raise AlgebraError("values must be positive")
        for i in range(m):
            if X[i][i] != 0:
                raise AlgebraError(f"diagonal entry {i} is non-zero")
            for j in range(i + 1, m):
                if X[i][j] != X[j][i]:
                    raise AlgebraError("matrix is not symmetric")
                if X[i][j] not in (v[i], v[j]):
                    raise AlgebraError(f"entry ({i},{j}) is neither {v[i]} nor {v[j]}")

    def rank(self) -> int:
        return rank_rational(self.matrix)


def family_to_choice_matrix(F: Family) -> ChoiceMatrixInstance:
    """``X = (nJ - M)/2`` for the +-1 Gram matrix ``M`` of a bisection-closed family."""
    if not verify_family(F, LSet([Fraction(1, 2)])).valid:
        raise AlgebraError("family is not bisection closed")
    n = F.ground_n
    M = gram_pm1(F)
    X = tuple(tuple((n - v) / 2 for v in row) for row in M)
    return ChoiceMatrixInstance(tuple(s.size for s in F.members), X)


def _choice_matrix(a: Sequence, bits: Sequence[int], pairs) -> list[list]:
    m = len(a)
    X = [[0] * m for _ in range(m)]
    for (i, j), bit in zip(pairs, bits):
        X[i][j] = X[j][i] = a[j] if bit else a[i]
    return X


def min_rank_choice(
    a_values: Sequence, mode: str = "exhaustive", seed: int | None = None, trials: int = 100
) -> tuple[int, tuple[int, ...]]:
    """Smallest rank over choice matrices for ``a_values``.

    Returns ``(rank, assignment)``; bit ``k`` of the assignment picks the larger
    index of the ``k``-th pair in ``combinations(range(n), 2)`` order.
    ``mode="random"`` draws ``trials`` seeded assignments and descends by
    single-pair flips; its answer is only an upper bound on the minimum.
    """
    a = [Fraction(x) for x in a_values]
    n = len(a)
    if any(x <= 0 for x in a) or any(a[k] >= a[k + 1] for k in range(n - 1)):
        raise AlgebraError("a_values must be distinct, positive and ascending")
    pairs = list(combinations(range(n), 2))
    if mode == "exhaustive":
        if n > EXHAUSTIVE_CHOICE_MAX_N:
            raise AlgebraError(f"exhaustive mode is limited to n <= {EXHAUSTIVE_CHOICE_MAX_N}")
        best = None
        for bits in product((0, 1), repeat=len(pairs)):
            r = rank_rational(_choice_matrix(a, bits, pairs))
            if best is None or r < best[0]:
                best = (r, bits)
        return best
    if mode == "random":
        if seed is None:
            raise AlgebraError("random mode needs a seed")
        rng = random.Random(seed)
        best = None
        for _ in range(max(trials, 1)):
            bits = [rng.randrange(2) for _ in pairs]
            r = rank_rational(_choice_matrix(a, bits, pairs))
            improved = True
            while improved:
                improved = False
                for k in rng.sample(range(len(pairs)), len(pairs)):
                    bits[k] ^= 1
                    r2 = rank_rational(_choice_matrix(a, bits, pairs))
                    if r2 < r:
                        r, improved = r2, True
                    else:
                        bits[k] ^= 1
            if best is None or r < best[0]:
                best = (r, tuple(bits))
        return best
    raise ValueError(f"unknown mode {mode!r}")
