"""Convex bodies inside the unit box and their projection oracles.

Three bodies are supported:

* ``box``: ``[0, 1]^n``
* ``cardinality``: ``{x in [0, 1]^n : sum(x) <= k}``
* ``simplex``: ``{x in [0, 1]^n : sum(x) = k}`` (the scaled, capped simplex)

Euclidean projections use the threshold form ``x = clip(y - lam, 0, 1)``;
KL projections use the scaling form ``x = min(1, c * y)``. Both thresholds
are found by sorting, O(n log n).
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import InputError

KINDS = ("box", "cardinality", "simplex")
MEMBERSHIP_TOL = 1e-9


@dataclass(frozen=True)
class ConstraintSet:
    kind: str
    n: int
    k: float | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InputError(f"unknown body {self.kind!r}; expected one of {KINDS}")
        if self.n < 1:
            raise InputError("dimension must be positive")
        if self.kind != "box":
            if self.k is None or not 0 < self.k <= self.n:
                raise InputError(f"budget k must satisfy 0 < k <= n (got k={self.k}, n={self.n})")

    @classmethod
    def box(cls, n: int) -> "ConstraintSet":
        return cls("box", n)

    @classmethod
    def cardinality(cls, n: int, k: float) -> "ConstraintSet":
        return cls("cardinality", n, k)

    @classmethod
    def simplex(cls, n: int, k: float) -> "ConstraintSet":
        return cls("simplex", n, k)

    @property
    def contains_origin(self) -> bool:
        return self.kind != "simplex"

    def contains(self, x, tol: float = MEMBERSHIP_TOL) -> bool:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.n,) or not np.all(np.isfinite(x)):
            return False
        if np.any(x < -tol) or np.any(x > 1 + tol):
            return False
        s = x.sum()
        if self.kind == "cardinality":
            return s <= self.k + tol
        if self.kind == "simplex":
            return abs(s - self.k) <= tol
        return True

    def center(self) -> np.ndarray:
        """The uniform point ``(k/n) * 1`` (``1/2`` for the box)."""
        if self.kind == "box":
            return np.full(self.n, 0.5)
        return np.full(self.n, self.k / self.n)

    def project_euclidean(self, y) -> np.ndarray:
        return project_euclidean(self, y)

    def project_kl(self, y) -> np.ndarray:
        return project_kl(self, y)

    def linear_maximize(self, g) -> np.ndarray:
        return linear_maximize(self, g)

    def vertices(self) -> np.ndarray:
        """All vertices, for integral k and small n (used by tests and brute force)."""
        if self.n > 20:
            raise InputError("vertex enumeration is limited to n <= 20")
        n = self.n
        if self.kind == "box":
            sizes = range(n + 1)
        else:
            if self.k != int(self.k):
                raise InputError("vertex enumeration needs an integral budget")
            k = int(self.k)
            sizes = range(k + 1) if self.kind == "cardinality" else [k]
        out = []
        for s in sizes:
            for comb in itertools.combinations(range(n), s):
                v = np.zeros(n)
                v[list(comb)] = 1.0
                out.append(v)
        return np.array(out)


def _threshold_clip(y: np.ndarray, k: float) -> np.ndarray:
    """Solve ``sum(clip(y - lam, 0, 1)) = k`` for lam and return the clipped point."""
    n = y.size
    if k >= n:
        return np.ones(n)
    if k <= 0:
        return np.zeros(n)
    # h(lam) = sum clip(y - lam, 0, 1) is piecewise linear and non-increasing with
    # kinks at y_i - 1 (coordinate leaves the cap) and y_i (coordinate hits 0)
    bps = np.concatenate([y - 1.0, y])
    delta = np.concatenate([-np.ones(n), np.ones(n)])
    order = np.argsort(bps, kind="stable")
    bps, delta = bps[order], delta[order]
    slope = np.cumsum(delta)
    h = n + np.concatenate([[0.0], np.cumsum(slope[:-1] * np.diff(bps))])
    j = int(np.searchsorted(-h, -k, side="right")) - 1
    j = min(max(j, 0), 2 * n - 2)
    if slope[j] < 0:
        lam = bps[j] + (h[j] - k) / (-slope[j])
    else:
        lam = bps[j]
    x = np.clip(y - lam, 0.0, 1.0)
    # re-solve lam exactly on the free coordinates to remove accumulated rounding
    free = (x > 0) & (x < 1)
    if np.any(free):
        ones = np.count_nonzero(x >= 1)
        lam = (y[free].sum() - (k - ones)) / np.count_nonzero(free)
        x2 = np.clip(y - lam, 0.0, 1.0)
        # free coordinates may land exactly on a bound; that is the exact answer
        same_bounds = np.array_equal(x2[~free], x[~free])
        if same_bounds and abs(x2.sum() - k) <= abs(x.sum() - k) + 4 * np.finfo(float).eps * k:
            x = x2
    return x


def project_euclidean(K: ConstraintSet, y) -> np.ndarray:
    """``argmin_{x in K} ||x - y||_2``."""
    y = np.asarray(y, dtype=float)
    if y.shape != (K.n,) or not np.all(np.isfinite(y)):
        raise InputError("projection input must be a finite vector of the body's dimension")
    x = np.clip(y, 0.0, 1.0)
    if K.kind == "box":
        return x
    if K.kind == "cardinality" and x.sum() <= K.k:
        return x
    return _threshold_clip(y, float(K.k))


def _kl_scale_capped(y: np.ndarray, k: float) -> np.ndarray:
    """Solve ``sum(min(1, c * y)) = k`` for c > 0 and return ``min(1, c * y)``."""
    n = y.size
    if k >= n:
        return np.ones(n)
    order = np.argsort(-y, kind="stable")
    ys = y[order]
    suffix = np.concatenate([np.cumsum(ys[::-1])[::-1], [0.0]])
    x = np.empty(n)
    for m in range(min(int(math.floor(k)), n - 1) + 1):
        # top m coordinates saturated, remaining mass k - m spread proportionally
        c = (k - m) / suffix[m]
        if c * ys[m] <= 1.0:
            x[order[:m]] = 1.0
            x[order[m:]] = c * ys[m:]
            return x
    raise AssertionError("unreachable: KL water-filling found no consistent saturation level")


def project_kl(K: ConstraintSet, y) -> np.ndarray:
    """``argmin_{x in K} sum x log(x / y) - x + y`` for strictly positive y."""
    y = np.asarray(y, dtype=float)
    if y.shape != (K.n,) or not np.all(np.isfinite(y)):
        raise InputError("projection input must be a finite vector of the body's dimension")
    if np.any(y <= 0):
        raise InputError("KL projection needs a strictly positive point; clamp coordinates first")
    x = np.minimum(y, 1.0)
    if K.kind == "box":
        return x
    if K.kind == "cardinality" and x.sum() <= K.k:
        return x
    return _kl_scale_capped(y, float(K.k))


def linear_maximize(K: ConstraintSet, g) -> np.ndarray:
    """A maximizer of ``<g, v>`` over K; ties go to the lowest index."""
    g = np.asarray(g, dtype=float)
    if g.shape != (K.n,) or not np.all(np.isfinite(g)):
        raise InputError("direction must be a finite vector of the body's dimension")
    v = np.zeros(K.n)
    if K.kind == "box":
        v[g > 0] = 1.0
        return v
    order = np.argsort(-g, kind="stable")
    k = float(K.k)
    whole = int(math.floor(k))
    frac = k - whole
    if K.kind == "cardinality":
        positive = int(np.count_nonzero(g > 0))
        if positive <= whole:
            v[order[:positive]] = 1.0
            return v
    v[order[:whole]] = 1.0
    if frac > 0 and whole < K.n and (K.kind == "simplex" or g[order[whole]] > 0):
        v[order[whole]] = frac
    return v


@dataclass(frozen=True)
class MirrorMap:
    """``euclidean``: ``0.5 * ||x||^2``; ``entropy``: ``k * sum x log x``."""

    kind: str
    k: float = 1.0

    def __post_init__(self):
        if self.kind not in ("euclidean", "entropy"):
            raise InputError(f"unknown mirror map {self.kind!r}")

    @classmethod
    def euclidean(cls) -> "MirrorMap":
        return cls("euclidean")

    @classmethod
    def entropy(cls, k: float) -> "MirrorMap":
        return cls("entropy", k)

    def phi(self, x) -> float:
        x = np.asarray(x, dtype=float)
        if self.kind == "euclidean":
            return 0.5 * float(x @ x)
        return self.k * float(np.sum(np.where(x > 0, x * np.log(np.where(x > 0, x, 1.0)), 0.0)))

    def grad(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.kind == "euclidean":
            return x.copy()
        return self.k * (1.0 + np.log(x))

    def bregman(self, x, y) -> float:
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if self.kind == "euclidean":
            d = x - y
            return 0.5 * float(d @ d)
        xlogx = np.where(x > 0, x * np.log(np.where(x > 0, x, 1.0) / y), 0.0)
        return self.k * float(np.sum(xlogx - x + y))

    def check_compatible(self, K: ConstraintSet) -> None:
        if self.kind == "entropy" and K.kind != "simplex":
            raise InputError("the entropy mirror map is paired with the scaled simplex only")

    def argmin(self, K: ConstraintSet) -> np.ndarray:
        """Minimizer of the potential over K, the standard mirror-ascent start."""
        self.check_compatible(K)
        if self.kind == "euclidean":
            return project_euclidean(K, np.zeros(K.n))
        return K.center()


def diameter(K: ConstraintSet, mirror: MirrorMap) -> float:
    """Squared radius R^2 used in step-size schedules.

    Euclidean: ``sup 0.5 * ||x - y||^2`` over K in closed form (integral k).
    Entropy on the scaled simplex: ``k * log(n)``.
    """
    if mirror.kind == "entropy":
        mirror.check_compatible(K)
        return float(K.k) * math.log(K.n)
    if K.kind == "box":
        return K.n / 2.0
    if K.k != int(K.k):
        raise InputError("closed-form Euclidean diameter needs an integral budget")
    k = int(K.k)
    if K.kind == "cardinality":
        return 0.5 * min(2 * k, K.n)
    return 0.5 * min(2 * k, 2 * (K.n - k))
