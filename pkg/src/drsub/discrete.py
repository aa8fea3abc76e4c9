"""Discrete baselines and rounding: greedy, pipage rounding, empirical objectives."""
from __future__ import annotations

import math

import numpy as np

from .errors import InputError
from .objectives import Mixture, SetFunction, SetFunctionFamily, as_family

INTEGRAL_TOL = 1e-9


class EmpiricalSetObjective(Mixture):
    """``(1/B) * sum_j f_j(S)`` over B sampled members of a family.

    ``evals`` counts single-function computations: every evaluation of the
    average on one set adds B.
    """

    def __init__(self, family: SetFunctionFamily, indices):
        indices = np.asarray(indices, dtype=np.int64)
        if indices.size == 0:
            raise InputError("an empirical objective needs at least one sample")
        super().__init__(family.subset(indices))
        self.indices = indices
        self.B = int(indices.size)
        self.evals = 0

    @classmethod
    def sample(cls, fs, B: int, rng: np.random.Generator, weights=None) -> "EmpiricalSetObjective":
        family = as_family(fs)
        if weights is None:
            idx = rng.integers(len(family), size=B)
        else:
            idx = rng.choice(len(family), size=B, p=np.asarray(weights, dtype=float))
        return cls(family, idx)

    def values(self, masks):
        masks = np.atleast_2d(masks)
        self.evals += self.B * masks.shape[0]
        return super().values(masks)


def greedy(f: SetFunction, k: int) -> list[int]:
    """Forward greedy: k rounds, each adding the element with the largest gain.

    Gains share the current value ``f(S)``, so each round only evaluates
    ``f(S + e)`` for the ``n - |S|`` candidates; ties go to the lowest index.
    Returns the chosen elements in selection order.
    """
    n = f.n
    if not 0 <= k <= n:
        raise InputError(f"budget k={k} outside [0, n={n}]")
    chosen: list[int] = []
    mask = np.zeros(n, dtype=bool)
    for _ in range(k):
        cand = np.flatnonzero(~mask)
        trial = np.repeat(mask[None, :], cand.size, axis=0)
        trial[np.arange(cand.size), cand] = True
        best = int(cand[np.argmax(f.values(trial))])
        mask[best] = True
        chosen.append(best)
    return chosen


def _pipage_rows(X: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Round every row of X (each with an integral sum) to a 0/1 vector."""
    X = X.copy()
    n = X.shape[1]
    ar = np.arange(X.shape[0])
    for _ in range(n):
        X[X < INTEGRAL_TOL] = 0.0
        X[X > 1 - INTEGRAL_TOL] = 1.0
        frac = (X > 0) & (X < 1)
        active = frac.sum(axis=1) >= 2
        if not np.any(active):
            break
        rows = ar[active]
        fa = frac[rows]
        i = fa.argmax(axis=1)
        fa[np.arange(rows.size), i] = False
        j = fa.argmax(axis=1)
        xi, xj = X[rows, i], X[rows, j]
        up = np.minimum(1 - xi, xj)
        down = np.minimum(xi, 1 - xj)
        # move along e_i - e_j by +up w.p. down/(up+down), else by -down
        go_up = rng.random(rows.size) * (up + down) < down
        d = np.where(go_up, up, -down)
        X[rows, i] = xi + d
        X[rows, j] = xj - d
    # a lone fractional coordinate can only be rounding residue of an integral sum
    return np.rint(X) > 0


def _check_fractional(x, k=None) -> tuple[np.ndarray, int]:
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or np.any(x < -INTEGRAL_TOL) or np.any(x > 1 + INTEGRAL_TOL):
        raise InputError("pipage rounding needs a point of the unit box")
    s = float(x.sum())
    kk = round(s)
    if abs(s - kk) > INTEGRAL_TOL:
        raise InputError(f"coordinate sum {s} is not integral")
    return np.clip(x, 0.0, 1.0), int(kk)


def pipage_round(x, rng: np.random.Generator) -> np.ndarray:
    """Randomized pipage rounding of a point with integral coordinate sum k.

    Returns the sorted indices of a set of size k. Each coordinate's
    inclusion probability equals ``x_i``; no set-function values are used.
    """
    x, _ = _check_fractional(x)
    return np.flatnonzero(_pipage_rows(x[None, :], rng)[0])


def pipage_round_many(x, draws: int, rng: np.random.Generator) -> np.ndarray:
    """``draws`` independent roundings of x as a boolean ``(draws, n)`` array."""
    x, _ = _check_fractional(x)
    return _pipage_rows(np.repeat(x[None, :], draws, axis=0), rng)


def pad_to_budget(x, k: float) -> np.ndarray:
    """Raise coordinates toward 1 in index order until ``sum(x) == k``."""
    x = np.array(x, dtype=float)
    deficit = k - x.sum()
    if deficit < -INTEGRAL_TOL:
        raise InputError(f"point has sum {x.sum()} above the budget {k}")
    for i in range(x.size):
        if deficit <= 0:
            break
        raise_by = min(1.0 - x[i], deficit)
        x[i] += raise_by
        deficit -= raise_by
    return x


def lift_and_round(x, k: int, rng: np.random.Generator) -> np.ndarray:
    """Pad a point of ``{sum(x) <= k}`` up to sum k, then pipage-round it.

    For monotone objectives padding cannot lower the multilinear value.
    """
    if k != math.floor(k) or k < 0:
        raise InputError("budget must be a non-negative integer")
    x = np.clip(np.asarray(x, dtype=float), 0.0, 1.0)
    if k > x.size:
        raise InputError("budget exceeds the ground-set size")
    return pipage_round(pad_to_budget(x, k), rng)
