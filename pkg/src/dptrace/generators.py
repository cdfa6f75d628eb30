"""Seeded generators of similar input pairs, with relation verifiers."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np

from .concrete import OMEGA, run_rng

# generated values live on this grid (a multiple of the sampling granularity),
# which keeps sums and differences of inputs exact in binary floating point
GRID = OMEGA * 2 ** 10

COORDINATE_WISE = "coordinate-wise"
L1 = "l1"
DATABASE = "database"


@dataclass(frozen=True)
class SimilarPair:
    x1: tuple
    x2: tuple
    relation: str
    k: float
    seed: object = None


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    if isinstance(seed, tuple):
        return run_rng(*seed)
    return np.random.default_rng(seed)


def snap(x: float) -> float:
    """Nearest grid point."""
    return float(round(x / GRID)) * GRID


def _toward_zero(x: float) -> float:
    return float(int(x / GRID)) * GRID


def _values(rng, n: int, lo: float, hi: float) -> tuple:
    return tuple(snap(v) for v in rng.uniform(lo, hi, size=n))


# gap patterns for coordinate-wise pairs; edge patterns use magnitudes close
# to the bound, where most coupling arguments are tight
PATTERNS = ("uniform", "edge", "up", "down", "split", "contract")


def _gaps(rng, pattern: str, x1: tuple, bound: float, lo: float, hi: float) -> np.ndarray:
    n = len(x1)
    if pattern == "uniform":
        return rng.uniform(-bound, bound, size=n)
    mags = rng.uniform(0.9 * bound, bound, size=n)
    if pattern == "edge":
        signs = rng.choice([-1.0, 1.0], size=n)
    elif pattern == "up":
        signs = np.ones(n)
    elif pattern == "down":
        signs = -np.ones(n)
    elif pattern == "split":
        signs = np.where(np.arange(n) < (n + 1) // 2, 1.0, -1.0)
    elif pattern == "contract":
        mid = (lo + hi) / 2
        signs = np.where(np.asarray(x1) > mid, -1.0, 1.0)
    else:
        raise ValueError(f"unknown gap pattern {pattern!r}")
    return signs * mags


def gen_coordinate_wise(length: int, bound: float = 1.0, seed=None, *,
                        lo: float = -10.0, hi: float = 10.0,
                        pattern: str | None = None) -> SimilarPair:
    """Equal-length vectors whose coordinates differ by strictly less than ``bound``.

    ``pattern`` shapes the gaps (see PATTERNS); by default each pair draws
    one at random.
    """
    if length < 1:
        raise ValueError("length must be at least 1")
    rng = _rng(seed)
    x1 = _values(rng, length, lo, hi)
    if pattern is None:
        pattern = PATTERNS[int(rng.integers(len(PATTERNS)))]
    gaps = _gaps(rng, pattern, x1, bound, lo, hi) if bound > 0 else np.zeros(length)
    x2 = []
    for a, g in zip(x1, gaps):
        g = _toward_zero(float(g))
        if abs(g) >= bound:  # uniform can return the endpoint
            g = 0.0
        x2.append(a + g)
    pair = SimilarPair(x1, tuple(x2), COORDINATE_WISE, bound, seed)
    assert verify(pair)
    return pair


def gen_l1(length: int, k: float = 1.0, seed=None, *,
           lo: float = -10.0, hi: float = 10.0) -> SimilarPair:
    """Equal-length vectors at L1 distance at most ``k``.

    The total distance is uniform on [0, k], split over coordinates with
    exponential weights and random signs.
    """
    if length < 1:
        raise ValueError("length must be at least 1")
    rng = _rng(seed)
    x1 = _values(rng, length, lo, hi)
    total = rng.uniform(0.0, k)
    weights = rng.exponential(size=length)
    signs = rng.choice([-1.0, 1.0], size=length)
    mags = weights / weights.sum() * total
    x2 = tuple(a + s * _toward_zero(float(m)) for a, s, m in zip(x1, signs, mags))
    pair = SimilarPair(x1, x2, L1, k, seed)
    assert verify(pair)
    return pair


def gen_database(size: int, k: int = 1, seed=None, *,
                 lo: float = -10.0, hi: float = 10.0) -> SimilarPair:
    """Multisets related by exactly ``k`` random insert/delete edits."""
    if size < 0:
        raise ValueError("size must be nonnegative")
    rng = _rng(seed)
    x1 = list(_values(rng, size, lo, hi))
    x2 = list(x1)
    for _ in range(int(k)):
        if x2 and rng.random() < 0.5:
            del x2[int(rng.integers(len(x2)))]
        else:
            pos = int(rng.integers(len(x2) + 1))
            x2.insert(pos, snap(float(rng.uniform(lo, hi))))
    pair = SimilarPair(tuple(x1), tuple(x2), DATABASE, k, seed)
    assert verify(pair)
    return pair


# ---------------------------------------------------------------------------
# Verifiers


def verify_coordinate_wise(x1, x2, bound) -> bool:
    if len(x1) != len(x2):
        return False
    if bound == 0:
        return tuple(x1) == tuple(x2)
    return all(abs(Fraction(a) - Fraction(b)) < Fraction(bound) for a, b in zip(x1, x2))


def verify_l1(x1, x2, k) -> bool:
    if len(x1) != len(x2):
        return False
    return sum(abs(Fraction(a) - Fraction(b)) for a, b in zip(x1, x2)) <= Fraction(k)


def multiset_distance(x1, x2) -> int:
    c1, c2 = Counter(x1), Counter(x2)
    return sum(((c1 - c2) + (c2 - c1)).values())


def verify_database(x1, x2, k) -> bool:
    return multiset_distance(x1, x2) <= k


def verify(pair: SimilarPair) -> bool:
    check = {COORDINATE_WISE: verify_coordinate_wise, L1: verify_l1,
             DATABASE: verify_database}[pair.relation]
    return check(pair.x1, pair.x2, pair.k)


GENERATORS: dict[str, Callable[..., SimilarPair]] = {
    COORDINATE_WISE: gen_coordinate_wise,
    L1: gen_l1,
    DATABASE: gen_database,
}


def size_ramp(i: int, n: int, lo: int, hi: int) -> int:
    """Input size for the i-th of n pairs, growing linearly from lo to hi."""
    if n <= 1:
        return lo
    return lo + (hi - lo) * i // (n - 1)
