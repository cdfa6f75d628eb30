"""Independent reference computations used to pin expected values in tests.

None of these import the package; each recomputes a quantity from first
principles by a different route than the implementation takes.
"""

from __future__ import annotations

import itertools
from fractions import Fraction

import mpmath


def geometric_weights(width: float, omega: float, support: int):
    """Brute-force two-sided geometric pmf on |k| <= support, normalized by summation."""
    with mpmath.workdps(40):
        a = mpmath.e ** (-mpmath.mpf(omega) / mpmath.mpf(width))
        w = {k: a ** abs(k) for k in range(-support, support + 1)}
        z = mpmath.fsum(w.values())
        return {k: v / z for k, v in w.items()}, a


def shift_interval(c1, c2, width, eps):
    """Shifts s with |c1 + s - c2| / width <= eps, as a closed rational interval."""
    c1, c2, width, eps = (Fraction(x) for x in (c1, c2, width, eps))
    return c2 - c1 - eps * width, c2 - c1 + eps * width


def intersect(*intervals):
    lo = max(i[0] for i in intervals)
    hi = min(i[1] for i in intervals)
    return (lo, hi) if lo <= hi else None


def rnm_witness_cost(q1, q2, r):
    """Total cost of the textbook noisy-max coupling for output r."""
    q1 = [Fraction(x) for x in q1]
    q2 = [Fraction(x) for x in q2]
    total = Fraction(0)
    for i, (a, b) in enumerate(zip(q1, q2)):
        shift = 1 if i == r else b - a
        total += abs(a + shift - b)
    return total


def sample_bound(delta, theta, n, k, c1, c2, omega) -> int:
    with mpmath.workdps(60):
        ratio = (mpmath.mpf(c2) - mpmath.mpf(c1)) / mpmath.mpf(omega)
        rhs = (mpmath.mpf(theta) + n * k * mpmath.log(2) + n * k * mpmath.log(ratio)) / mpmath.mpf(delta)
        return int(mpmath.ceil(rhs))


def ln_factor(c1, c2, omega) -> float:
    with mpmath.workdps(60):
        return float(mpmath.log((mpmath.mpf(c2) - mpmath.mpf(c1)) / mpmath.mpf(omega)))


def clipped_sum(xs, clip):
    return sum(min(max(x, -clip), clip) for x in xs)


def count_points(points, lo, hi):
    return len([p for p in points if lo <= p < hi])


def binary_scheme_sums(xs):
    """Block-of-two running sums: completed blocks plus the open block."""
    out, done = [], 0.0
    for i, x in enumerate(xs):
        if i % 2 == 0:
            out.append(done + x)
        else:
            done = done + xs[i - 1] + x
            out.append(done)
    return out


def sv_outputs(length: int, n: int):
    """Every output list SparseVector can produce: apply the cutoff to each above/below pattern."""
    outs = set()
    for pattern in itertools.product([False, True], repeat=length):
        acc, left = [], n
        for above in pattern:
            if left <= 0:
                break
            acc.append(above)
            left -= above
        outs.add(tuple(acc))
    return outs


def multiset_distance(a, b) -> int:
    a, b = sorted(a), sorted(b)
    i = j = d = 0
    while i < len(a) and j < len(b):
        if a[i] == b[j]:
            i, j = i + 1, j + 1
        elif a[i] < b[j]:
            i, d = i + 1, d + 1
        else:
            j, d = j + 1, d + 1
    return d + (len(a) - i) + (len(b) - j)


def failure_prob(d, theta, alpha) -> float:
    with mpmath.workdps(40):
        return float(mpmath.exp(-mpmath.mpf(d) * (mpmath.mpf(theta) + mpmath.mpf(alpha))))
