import itertools

import numpy as np
import pytest

from drsub.objectives import Coverage, concave_over_modular, facility_location


def random_coverage(rng, n, universe=None, density=0.3):
    universe = universe or max(2, 2 * n)
    cover = rng.random((n, universe)) < density
    return Coverage([np.flatnonzero(row).tolist() for row in cover], universe)


def random_ratings(rng, users, n, density=0.5, r_max=5):
    R = rng.integers(1, r_max + 1, size=(users, n)).astype(float)
    return np.where(rng.random((users, n)) < density, R, 0.0)


def random_monotone_submodular(rng, n):
    """One of coverage, facility location or concave-over-modular, chosen at random."""
    kind = rng.integers(3)
    if kind == 0:
        return random_coverage(rng, n)
    R = random_ratings(rng, int(rng.integers(3, 8)), n)
    if kind == 1:
        return facility_location(R)
    return concave_over_modular(R, power=float(rng.uniform(0.3, 1.0)))


def brute_force_multilinear(f, x):
    """Sum over all subsets of f(S) times its probability under independent inclusion."""
    n = len(x)
    total = 0.0
    for bits in itertools.product((0, 1), repeat=n):
        mask = np.array(bits, dtype=bool)
        p = np.prod(np.where(mask, x, 1 - x))
        total += p * f.value(mask)
    return total


def best_subset_value(f, k):
    """Max of f over sets of size exactly k (equal to max over size <= k for monotone f)."""
    best = -np.inf
    for S in itertools.combinations(range(f.n), k):
        mask = np.zeros(f.n, dtype=bool)
        mask[list(S)] = True
        best = max(best, f.value(mask))
    return best


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
