"""Upper bounds on fractional L-intersecting families, evaluated exactly where possible."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from math import comb

from sympy import isprime, nextprime

from .core import FamilyError, LSet

__all__ = [
    "binomial",
    "g_value",
    "prime_window",
    "fi_bound",
    "ceil_log",
    "BoundReport",
    "theorem1_bound",
    "theorem2_bound",
    "theorem3_threshold",
    "theorem3_bound",
    "theorem4_window",
    "theorem4_bound",
]


def binomial(n: int, k: int) -> int:
    """``C(n, k)``, zero outside ``0 <= k <= n``."""
    if n < 0:
        raise ValueError("n must be non-negative")
    if k < 0 or k > n:
        return 0
    return comb(n, k)


def g_value(t: int, n: int, variant: str = "theorem") -> float:
    """``2(2t + ln n) / ln(2t + ln n)``.

    ``variant="proof"`` drops the leading factor 2, which is how the quantity
    appears inside the argument for the prime window length.
    """
    if t < 1 or n < 2:
        raise ValueError("need t >= 1 and n >= 2")
    x = 2 * t + math.log(n)
    g = x / math.log(x)
    if variant == "theorem":
        return 2 * g
    if variant == "proof":
        return g
    raise ValueError(f"unknown g variant {variant!r}")


def prime_window(t: int, n: int, c1: int | None = None) -> list[int]:
    """Consecutive primes above ``t``: the shortest run with product > n, or exactly ``c1`` of them."""
    if t < 1 or n < 1:
        raise ValueError("need t >= 1 and n >= 1")
    out, prod, p = [], 1, t
    while True:
        if c1 is not None and len(out) == c1:
            return out
        if c1 is None and prod > n:
            return out
        p = nextprime(p)
        out.append(int(p))
        prod *= p


def fi_bound(n: int, s: int, i: int) -> int:
    """Size bound for one non-zero residue class of the partition."""
    if i < 1 or s < 1:
        raise ValueError("need i >= 1 and s >= 1")
    return binomial(n, s) + (binomial(n, i) if i < s else 0)


def ceil_log(n: int, b: int) -> int:
    """Smallest ``k >= 0`` with ``b**k >= n``, in integer arithmetic."""
    if b < 2 or n < 1:
        raise ValueError("need b >= 2 and n >= 1")
    k, power = 0, 1
    while power < n:
        power *= b
        k += 1
    return k


@dataclass
class BoundReport:
    n: int
    s: int
    t: int
    case: str
    g_value: float
    g_variant: str
    prime_window: list[int]
    exact_prime_bound: int
    closed_form_bound: float | int
    case_a_applies: bool = False
    case_a_bound: float | None = None
    c1: int | None = None
    case_b_window: list[int] = field(default_factory=list)
    case_b_bound: float | None = None
    case_b_exact_bound: int | None = None

    def to_dict(self) -> dict:
        return asdict(self)


def _low_sum(n: int, s: int) -> int:
    # sum_{j=1}^{s-1} C(n, j); empty (0) when s = 1
    return sum(binomial(n, j) for j in range(1, s))


def _window_exact(n: int, s: int, P: list[int]) -> int:
    return (sum(P) - len(P)) * binomial(n, s) + len(P) * _low_sum(n, s)


def theorem1_bound(
    n: int, L: LSet, uniform_t: int | None = None, g_variant: str = "theorem"
) -> BoundReport:
    """Evaluate the general bound, its two refinements and the exact prime-window bound.

    When ``uniform_t`` is given the family is known to be uniform and the
    closed form is replaced by ``C(n, s)``.
    """
    s, t = L.s, L.t
    P = prime_window(t, n)
    exact = _window_exact(n, s, P)
    g = g_value(t, max(n, 2), g_variant)
    glng = g * math.log(g)
    low = _low_sum(n, s)
    cns = binomial(n, s)
    general = 2 * cns * g * glng + low * g

    c1 = n - t + 1 if t <= n else 1
    Pb = prime_window(t, n, c1=c1)
    report = BoundReport(
        n=n,
        s=s,
        t=t,
        case="general",
        g_value=g,
        g_variant=g_variant,
        prime_window=P,
        exact_prime_bound=exact,
        closed_form_bound=general,
        c1=c1,
        case_b_window=Pb,
        case_b_bound=2 * c1 * cns * glng + c1 * low,
        case_b_exact_bound=_window_exact(n, s, Pb),
    )
    if s <= n + 1 - 2 * glng:
        report.case_a_applies = True
        report.case_a_bound = 2 * cns * g * glng
    if uniform_t is not None:
        report.case = "uniform"
        report.closed_form_bound = cns
    return report


def theorem2_bound(n: int, frac: Fraction) -> int:
    """Bound for ``L = {a/b}`` with ``b`` prime; ``n`` when ``a = 0``."""
    frac = Fraction(frac)
    a, b = frac.numerator, frac.denominator
    if n < 2:
        raise ValueError("need n >= 2")
    if a == 0:
        return n
    if not isprime(b):
        raise FamilyError(f"denominator {b} is not prime; the singleton bound needs a prime b")
    return (b - 1) * (n + 1) * ceil_log(n, b) + 1


def theorem3_threshold(L: LSet) -> Fraction:
    """Size threshold ``alpha``: members larger than ``alpha * n`` force ``|F| <= n``."""
    top = max(L.fractions)
    a, b = top.numerator, top.denominator
    return max(Fraction(1, 2), Fraction(4 * a - b, 2 * b))


def theorem3_bound(n: int) -> int:
    return n


def _window_params(n: int, frac: Fraction, delta: Fraction) -> tuple[Fraction, Fraction]:
    frac, delta = Fraction(frac), Fraction(delta)
    a, b = frac.numerator, frac.denominator
    if a == 0:
        raise FamilyError("the size window needs a >= 1")
    if delta <= 1:
        raise FamilyError("delta must exceed 1")
    center = Fraction(b, 4 * (b - a)) * n
    # radius = b/(4 a delta) * sqrt(n); keep it squared to stay rational
    radius_sq = Fraction(b * b, 16 * a * a) / (delta * delta) * n
    return center, radius_sq


def theorem4_window(n: int, frac: Fraction, delta: Fraction) -> list[int]:
    """Integer set sizes inside the closed window around ``b n / (4(b - a))``."""
    center, radius_sq = _window_params(n, frac, delta)
    radius = math.isqrt(math.ceil(radius_sq)) + 2
    lo = max(0, math.floor(center) - radius)
    hi = min(n, math.ceil(center) + radius)
    return [k for k in range(lo, hi + 1) if (k - center) ** 2 <= radius_sq]


def theorem4_bound(n: int, delta: Fraction) -> Fraction:
    """The strict upper bound ``delta^2/(delta^2 - 1) * n``."""
    delta = Fraction(delta)
    if delta <= 1:
        raise FamilyError("delta must exceed 1")
    return delta * delta / (delta * delta - 1) * n
