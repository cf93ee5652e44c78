"""Exact set-family primitives and the fractional L-intersecting verifier.

Subsets are stored as Python integers used as bitmasks, bit ``k - 1`` standing
for element ``k`` of the ground set ``[n]``.  Python integers are unbounded, so
there is no word-size cap on ``n`` in this layer.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Sequence

__all__ = [
    "make_fraction",
    "Subset",
    "LSet",
    "Family",
    "VerificationReport",
    "is_fractional_pair",
    "pair_witness",
    "verify_family",
    "is_avoiding",
    "uniformity",
    "induced_classical_L",
    "FamilyError",
]


class FamilyError(ValueError):
    """Raised on malformed fractions, subsets, L-sets or families."""


def make_fraction(a: int, b: int) -> Fraction:
    """Return the irreducible fraction ``a/b``, which must lie in ``[0, 1)``."""
    if b == 0:
        raise FamilyError("denominator must be positive, got 0")
    if b < 0 or a < 0:
        raise FamilyError(f"fraction {a}/{b} must have a >= 0 and b > 0")
    if a >= b:
        raise FamilyError(f"fraction {a}/{b} is not below 1")
    return Fraction(a, b)


def _check_fraction(x: Fraction) -> Fraction:
    x = Fraction(x)
    if not 0 <= x < 1:
        raise FamilyError(f"fraction {x} is outside [0, 1)")
    return x


@dataclass(frozen=True, order=False)
class Subset:
    mask: int
    ground_n: int

    def __post_init__(self):
        if self.ground_n < 1:
            raise FamilyError("ground set size must be positive")
        if self.mask < 0 or self.mask >> self.ground_n:
            raise FamilyError(f"mask {self.mask:#x} has bits outside [1..{self.ground_n}]")

    @classmethod
    def from_elements(cls, elements: Iterable[int], n: int) -> "Subset":
        mask = 0
        for e in elements:
            if not 1 <= e <= n:
                raise FamilyError(f"element {e} is outside [1..{n}]")
            mask |= 1 << (e - 1)
        return cls(mask, n)

    @property
    def size(self) -> int:
        return self.mask.bit_count()

    def __len__(self) -> int:
        return self.mask.bit_count()

    def elements(self) -> list[int]:
        m = self.mask
        if 8 * m.bit_count() > m.bit_length():
            # dense: scanning the binary string beats peeling bits one at a time
            return [i for i, c in enumerate(bin(m)[:1:-1], 1) if c == "1"]
        out = []
        while m:
            low = m & -m
            out.append(low.bit_length())
            m ^= low
        return out

    def intersection_size(self, other: "Subset") -> int:
        return (self.mask & other.mask).bit_count()

    def sort_key(self) -> tuple[int, int]:
        return (self.mask.bit_count(), self.mask)

    def __repr__(self) -> str:
        return "{" + ",".join(map(str, self.elements())) + "}"


@dataclass(frozen=True)
class LSet:
    """A non-empty collection of distinct fractions in ``[0, 1)``.

    Fractions are kept in ascending order.  Passing the same value twice, even
    in different written forms such as ``1/2`` and ``2/4``, is an error.
    """

    fractions: tuple[Fraction, ...]

    def __init__(self, fractions: Iterable[Fraction | tuple[int, int] | str]):
        vals = []
        for f in fractions:
            if isinstance(f, tuple):
                f = make_fraction(*f)
            elif isinstance(f, str):
                f = _parse_fraction_token(f)
            vals.append(_check_fraction(f))
        if not vals:
            raise FamilyError("L must be non-empty")
        if len(set(vals)) != len(vals):
            raise FamilyError("L contains duplicate fractions after reduction")
        object.__setattr__(self, "fractions", tuple(sorted(vals)))

    @classmethod
    def parse(cls, text: str) -> "LSet":
        tokens = [t.strip() for t in text.split(",") if t.strip()]
        return cls(tokens)

    @property
    def s(self) -> int:
        return len(self.fractions)

    @property
    def t(self) -> int:
        """``max(s, max denominator)``, the parameter the bounds are stated in."""
        return max(self.s, max(f.denominator for f in self.fractions))

    def __iter__(self):
        return iter(self.fractions)

    def __len__(self) -> int:
        return len(self.fractions)

    def __str__(self) -> str:
        return ",".join(f"{f.numerator}/{f.denominator}" for f in self.fractions)


def _parse_fraction_token(tok: str) -> Fraction:
    tok = tok.strip()
    if "/" in tok:
        a, _, b = tok.partition("/")
        try:
            return make_fraction(int(a), int(b))
        except ValueError as exc:
            if isinstance(exc, FamilyError):
                raise
            raise FamilyError(f"bad fraction token {tok!r}") from exc
    try:
        return make_fraction(int(tok), 1)
    except ValueError as exc:
        if isinstance(exc, FamilyError):
            raise
        raise FamilyError(f"bad fraction token {tok!r}") from exc


@dataclass(frozen=True)
class Family:
    """Distinct subsets of a common ground set, in canonical (size, mask) order."""

    ground_n: int
    members: tuple[Subset, ...]

    def __init__(self, ground_n: int, members: Iterable[Subset]):
        if ground_n < 1:
            raise FamilyError("ground set size must be positive")
        members = list(members)
        for s in members:
            if s.ground_n != ground_n:
                raise FamilyError(
                    f"member {s!r} lives on [{s.ground_n}], family on [{ground_n}]"
                )
        masks = [s.mask for s in members]
        if len(set(masks)) != len(masks):
            raise FamilyError("family members must be pairwise distinct")
        object.__setattr__(self, "ground_n", ground_n)
        object.__setattr__(self, "members", tuple(sorted(members, key=Subset.sort_key)))

    @classmethod
    def from_masks(cls, masks: Iterable[int], n: int) -> "Family":
        return cls(n, (Subset(m, n) for m in masks))

    @classmethod
    def from_sets(cls, sets: Iterable[Iterable[int]], n: int) -> "Family":
        return cls(n, (Subset.from_elements(s, n) for s in sets))

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def __getitem__(self, i):
        return self.members[i]

    @property
    def masks(self) -> list[int]:
        return [s.mask for s in self.members]

    def as_lists(self) -> list[list[int]]:
        return [s.elements() for s in self.members]

    def permuted(self, perm: Sequence[int]) -> "Family":
        """Relabel element ``k`` as ``perm[k - 1]`` (``perm`` is a permutation of 1..n)."""
        n = self.ground_n
        if sorted(perm) != list(range(1, n + 1)):
            raise FamilyError("perm must be a permutation of 1..n")
        return Family.from_sets(([perm[e - 1] for e in s.elements()] for s in self.members), n)


@dataclass(frozen=True)
class VerificationReport:
    valid: bool
    violations: tuple[tuple[int, int], ...] = ()
    pair_witnesses: dict[tuple[int, int], Fraction] = field(default_factory=dict)

    def to_dict(self) -> dict:
        # 1-based member indices externally
        return {
            "valid": self.valid,
            "violations": [[i + 1, j + 1] for i, j in self.violations],
        }


def pair_witness(a_size: int, b_size: int, inter: int, L: LSet) -> Fraction | None:
    """First fraction of ``L`` certifying the pair, decided in integer arithmetic."""
    for f in L.fractions:
        p, q = f.numerator, f.denominator
        if q * inter == p * a_size or q * inter == p * b_size:
            return f
    return None


def is_fractional_pair(A: Subset, B: Subset, L: LSet) -> tuple[bool, Fraction | None]:
    """Decide the pairwise condition; returns ``(ok, certifying fraction or None)``."""
    if A.ground_n != B.ground_n:
        raise FamilyError("subsets live on different ground sets")
    if A.mask == B.mask:
        raise FamilyError("the pairwise condition is only defined for distinct sets")
    w = pair_witness(A.size, B.size, A.intersection_size(B), L)
    return (w is not None, w)


def verify_family(F: Family, L: LSet) -> VerificationReport:
    violations = []
    witnesses = {}
    sizes = [s.size for s in F.members]
    masks = F.masks
    for i, j in combinations(range(len(masks)), 2):
        w = pair_witness(sizes[i], sizes[j], (masks[i] & masks[j]).bit_count(), L)
        if w is None:
            violations.append((i, j))
        else:
            witnesses[(i, j)] = w
    return VerificationReport(not violations, tuple(violations), witnesses)


def _can_bisect(a: int, b: int, n: int) -> bool:
    # some A, B of sizes a, b in [n] could have |A & B| in {a/2, b/2}
    lo, hi = max(0, a + b - n), min(a, b)
    return lo <= a // 2 <= hi or lo <= b // 2 <= hi


def is_avoiding(F: Family) -> bool:
    """True iff no member bisects another.  Members must be even-sized.

    Pairs of size classes that cannot bisect for counting reasons (the forced
    overlap ``a + b - n`` already exceeds both halves) are skipped wholesale;
    every other pair is checked directly.
    """
    by_size: dict[int, list[int]] = {}
    for s in F.members:
        if s.size % 2:
            raise FamilyError(f"member {s!r} has odd size {s.size}")
        by_size.setdefault(s.size, []).append(s.mask)
    sizes = sorted(by_size)
    n = F.ground_n
    for x, a in enumerate(sizes):
        for b in sizes[x:]:
            if not _can_bisect(a, b, n):
                continue
            ha, hb = a // 2, b // 2
            left, right = by_size[a], by_size[b]
            if a == b:
                for i, j in combinations(range(len(left)), 2):
                    if (left[i] & left[j]).bit_count() == ha:
                        return False
            else:
                for u in left:
                    for v in right:
                        k = (u & v).bit_count()
                        if k == ha or k == hb:
                            return False
    return True


def uniformity(F: Family) -> int | None:
    if not len(F):
        raise FamilyError("uniformity of an empty family is undefined")
    sizes = {s.size for s in F.members}
    return sizes.pop() if len(sizes) == 1 else None


def induced_classical_L(t: int, L: LSet) -> list[int]:
    """Integer intersection sizes a t-uniform fractional family can realise."""
    if t < 1:
        raise FamilyError("t must be positive")
    return sorted({(f.numerator * t) // f.denominator for f in L.fractions})
