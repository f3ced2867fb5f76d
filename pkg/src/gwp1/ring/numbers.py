"""Exact rational scalars and the Bernoulli / Pochhammer machinery.

The base field is the rationals, realized by :class:`fractions.Fraction`.
Serialization follows the "p/q" contract (q > 0, gcd-reduced); integers are
rendered bare, so ``rat_to_str(Fraction(1)) == "1"``.
"""

from __future__ import annotations

import threading
from fractions import Fraction
from math import comb

Rational = Fraction

_ZERO = Fraction(0)
_ONE = Fraction(1)


def rat_to_str(x: Fraction) -> str:
    """Serialize a rational as "p/q" (reduced, q > 0), or "p" when q == 1."""
    x = Fraction(x)
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


def rat_from_str(s: str) -> Fraction:
    """Parse "p/q" or a bare integer string into an exact rational."""
    return Fraction(s)


def binomial(n: int, k: int) -> int:
    """Binomial coefficient with C(n, k) = 0 for k < 0 or k > n >= 0."""
    if k < 0:
        return 0
    if n >= 0:
        return comb(n, k) if k <= n else 0
    # negative upper index: C(n, k) = (-1)^k C(k - n - 1, k)
    return (-1) ** k * comb(k - n - 1, k)


def falling_binomial(x: Fraction, k: int) -> Fraction:
    """C(x, k) = x(x-1)...(x-k+1)/k! for rational x."""
    if k < 0:
        return _ZERO
    num = _ONE
    for i in range(k):
        num *= x - i
    return num / _factorial(k)


def _factorial(n: int) -> int:
    r = 1
    for i in range(2, n + 1):
        r *= i
    return r


def pochhammer(x, k: int):
    """Rising factorial (x)_k = x (x+1) ... (x+k-1); the empty product is 1.

    Works for any ring element supporting + and * with ints (Fraction,
    MultiPoly, mpmath values).
    """
    if k < 0:
        raise ValueError("pochhammer requires k >= 0")
    if k == 0:
        if isinstance(x, (int, Fraction)):
            return _ONE
        return x * 0 + 1
    result = x
    for i in range(1, k):
        result = result * (x + i)
    return result


# Memoized Bernoulli numbers (second convention, B_1 = -1/2).  The cache is
# guarded by a lock so concurrent tasks may share it.
_bernoulli_cache: list[Fraction] = [Fraction(1)]
_bernoulli_lock = threading.Lock()


def bernoulli_number(n: int) -> Fraction:
    """Bernoulli number B_n with B_1 = -1/2, via the binomial recurrence

        sum_{r=0}^{m} C(m+1, r) B_r = 0   (m >= 1).
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    with _bernoulli_lock:
        while len(_bernoulli_cache) <= n:
            m = len(_bernoulli_cache)
            s = _ZERO
            for r in range(m):
                s += comb(m + 1, r) * _bernoulli_cache[r]
            _bernoulli_cache.append(-s / (m + 1))
        return _bernoulli_cache[n]


def bernoulli_poly(j: int):
    """Bernoulli polynomial B_j(u), the unique polynomial with

        integral_{v}^{v+1} B_j(u) du = v^j.

    Returned as a :class:`MultiPoly` in the single variable ``u`` with exact
    rational coefficients: B_j(u) = sum_i C(j, i) B_i u^{j-i}.
    """
    from gwp1.ring.poly import MultiPoly

    if j < 0:
        raise ValueError("j must be >= 0")
    terms = {}
    for i in range(j + 1):
        c = comb(j, i) * bernoulli_number(i)
        if c:
            terms[(j - i,)] = c
    return MultiPoly(("u",), terms)
