"""Independent reference computations used by the tests.

None of these touch the library's enclosure, normalization or structure
code: square roots come from Newton iteration on rationals, set questions
from raw (unnormalized) interval lists, generator sums from mpmath.
"""

from fractions import Fraction

import mpmath


def newton_sqrt_bounds(q: Fraction, bits: int = 256):
    """Rational bounds lo <= sqrt(q) <= hi from Newton iteration started above the root.

    Iterates are rounded up to a 2^-bits grid, which keeps them above the
    root and keeps the numbers small.
    """
    q = Fraction(q)
    if q == 0:
        return Fraction(0), Fraction(0)
    scale = 1 << bits
    x = max(q, Fraction(1))
    for _ in range(bits + 64):
        nxt = (x + q / x) / 2
        nxt = Fraction(-((-nxt.numerator * scale) // nxt.denominator), scale)
        if nxt >= x:
            break
        x = nxt
    return q / x, x


def in_raw(raw, x) -> bool:
    """Membership of x in the union of raw (left, right, left_closed, right_closed) tuples."""
    for a, b, lc, rc in raw:
        if (a < x or (lc and a == x)) and (x < b or (rc and x == b)):
            return True
    return False


def raw_measure_between(raw, u, v) -> Fraction:
    """lambda(union & [u, v]) by an endpoint sweep over the raw pieces (overlaps counted once)."""
    cuts = sorted({u, v} | {e for a, b, *_ in raw for e in (a, b) if u < e < v})
    total = Fraction(0)
    for lo, hi in zip(cuts, cuts[1:]):
        if in_raw(raw, (lo + hi) / 2):
            total += hi - lo
    return total


def classical_density(raw, p):
    """Two-sided, left and right classical densities of the raw union at p.

    Inside a punctured neighbourhood smaller than the distance to any other
    endpoint the union is either full or empty on each side, so probing one
    point per side decides it.
    """
    p = Fraction(p)
    dists = [abs(e - p) for a, b, *_ in raw for e in (a, b) if e != p]
    delta = min(dists) / 2 if dists else Fraction(1)
    left = Fraction(int(in_raw(raw, p - delta)))
    right = Fraction(int(in_raw(raw, p + delta)))
    return (left + right) / 2, left, right


def brute_count(pred, n: int) -> int:
    return sum(1 for m in range(1, n + 1) if pred(m))


def is_square(m: int) -> bool:
    r = int(m ** 0.5)
    while r * r > m:
        r -= 1
    while (r + 1) * (r + 1) <= m:
        r += 1
    return r * r == m


def example_generator_mass(h, terms: int = 120, dps: int = 80):
    """mpmath value of lambda(A & [0, h]) for A = U [1/(k+1)!, 1/(k! sqrt(k+1))]."""
    with mpmath.workdps(dps):
        h = mpmath.mpf(h.numerator) / h.denominator if isinstance(h, Fraction) else mpmath.mpf(h)
        total = mpmath.mpf(0)
        for k in range(1, terms):
            left = 1 / mpmath.factorial(k + 1)
            right = 1 / (mpmath.factorial(k) * mpmath.sqrt(k + 1))
            if left < h:
                total += min(h, right) - left
        return total
