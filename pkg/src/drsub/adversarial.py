"""Two hand-built hard instances.

``stationary_trap_instance(k)``: a coverage function on ``2k + 1`` elements whose
multilinear extension has a stationary local maximum worth ``k + 1`` on the
body ``{sum x = k}`` while the optimum is ``2k``.

``frank_wolfe_trap_instance(n)``: a finite family of linear functions on which
stochastic Frank-Wolfe with batch size 1 stalls at ratio ``2 / (n - 1)``.

Element indices are 0-based throughout; element ``2k`` (0-based) is the
shared "hub" element of the coverage construction.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import InputError
from .geometry import ConstraintSet
from .objectives import Coverage, Modular, MultilinearObjective, stochastic_objective


@dataclass
class StationaryTrapInstance:
    k: int
    f: Coverage
    K: ConstraintSet
    x_loc: np.ndarray
    objective: MultilinearObjective = field(repr=False)

    @property
    def n(self) -> int:
        return 2 * self.k + 1

    def closed_form(self, x) -> float:
        """``k+1 - (1-x_h) prod_{i<k}(1-x_i) - (1-x_h)(k - sum_{i<k} x_i) + sum_{k<=i<2k} x_i``."""
        x = np.asarray(x, dtype=float)
        k = self.k
        head, mid, hub = x[:k], x[k : 2 * k], x[2 * k]
        return float(k + 1 - (1 - hub) * np.prod(1 - head) - (1 - hub) * (k - head.sum()) + mid.sum())

    def closed_form_grad(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        k = self.k
        head, hub = x[:k], x[2 * k]
        g = np.ones(self.n)
        others = np.array([np.prod(np.delete(1 - head, i)) for i in range(k)])
        g[:k] = (1 - hub) * (others + 1)
        g[2 * k] = np.prod(1 - head) + (k - head.sum())
        return g

    @cached_property
    def opt(self) -> float:
        """Best value over the vertices of K, i.e. over sets of size k."""
        return float(self._best_vertex[1])

    @cached_property
    def x_opt(self) -> np.ndarray:
        return self._best_vertex[0]

    @cached_property
    def _best_vertex(self):
        t = self.f.table()
        codes = np.arange(t.size)
        size_k = np.bitwise_count(codes.astype(np.uint64)) == self.k
        best = int(codes[size_k][np.argmax(t[size_k])])
        x = ((best >> np.arange(self.n)) & 1).astype(float)
        return x, float(t[best])

    @property
    def predicted_ratio(self) -> float:
        return 0.5 + 0.5 / self.k


def stationary_trap_sets(k: int) -> list[set[int]]:
    """Coverage family: ``{i, hub}`` for ``i < k``, ``{i}`` for ``k <= i < 2k``, and ``{0..k-1, hub}``."""
    hub = 2 * k
    sets = [{i, hub} for i in range(k)]
    sets += [{i} for i in range(k, 2 * k)]
    sets.append(set(range(k)) | {hub})
    return sets


def stationary_trap_instance(k: int) -> StationaryTrapInstance:
    if k < 1:
        raise InputError("k must be at least 1")
    n = 2 * k + 1
    f = Coverage(stationary_trap_sets(k), n)
    x_loc = np.zeros(n)
    x_loc[:k] = 1.0
    return StationaryTrapInstance(k, f, ConstraintSet.simplex(n, k), x_loc, stochastic_objective(f))


def perturb_around_x_loc(inst: StationaryTrapInstance, eps: float, rng: np.random.Generator) -> np.ndarray:
    """Random feasible point ``(1 - e_head, e_rest)`` with ``e_i in [0, eps]`` and equal sums."""
    k = inst.k
    head = rng.random(k) * eps
    rest = rng.random(k + 1) * eps
    sh, sr = head.sum(), rest.sum()
    if sh > sr:
        head *= sr / sh
    elif sr > 0:
        rest *= sh / sr
    return np.concatenate([1 - head, rest])


@dataclass
class FrankWolfeTrapInstance:
    n: int
    m: np.ndarray
    fs: list[Modular]
    K: ConstraintSet
    objective: MultilinearObjective = field(repr=False)

    @property
    def x_star(self) -> np.ndarray:
        e = np.zeros(self.n)
        e[-1] = 1.0
        return e

    @property
    def x_inf(self) -> np.ndarray:
        x = np.full(self.n, 1.0 / (self.n - 1))
        x[-1] = 0.0
        return x

    @property
    def mean_gradient(self) -> np.ndarray:
        return self.m.mean(axis=0)

    def value(self, x) -> float:
        return float(self.mean_gradient @ np.asarray(x, dtype=float))

    @property
    def opt(self) -> float:
        return 0.5

    @property
    def predicted_ratio(self) -> float:
        return 2.0 / (self.n - 1)


def frank_wolfe_trap_instance(n: int) -> FrankWolfeTrapInstance:
    """``n - 1`` linear functions ``F_i(x) = x_i + x_n / 2`` on ``{sum x <= 1}``."""
    if n < 3:
        raise InputError("n must be at least 3")
    m = np.zeros((n - 1, n))
    m[np.arange(n - 1), np.arange(n - 1)] = 1.0
    m[:, -1] = 0.5
    fs = [Modular(row) for row in m]
    return FrankWolfeTrapInstance(n, m, fs, ConstraintSet.cardinality(n, 1), stochastic_objective(fs))


def brute_force_opt_grid(F, K: ConstraintSet, step: float) -> float:
    """Max of ``F`` over grid points of K with spacing ``step`` (small n only)."""
    levels = np.round(np.arange(0, 1 + step / 2, step), 12)
    best = -np.inf
    for point in itertools.product(levels, repeat=K.n):
        x = np.array(point)
        if K.contains(x, tol=1e-9):
            best = max(best, F(x))
    return float(best)
