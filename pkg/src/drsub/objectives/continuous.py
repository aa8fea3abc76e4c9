"""Continuous objectives on the unit box, mostly multilinear extensions."""
from __future__ import annotations

from typing import Callable

import numpy as np

from ..errors import CapabilityError, InputError
from .setfunctions import MAX_ENUMERATION_N, Mixture, SetFunction, SetFunctionFamily, as_family


def _check_point(x, n: int) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (n,):
        raise InputError(f"point has shape {x.shape}, expected ({n},)")
    return x


def _contract(table: np.ndarray, x: np.ndarray) -> float:
    t = table
    for xi in x:
        t = t.reshape(-1, 2) @ np.array([1.0 - xi, xi])
    return float(t[0])


def multilinear_eval_exact(f: SetFunction, x) -> float:
    """``sum_S f(S) prod_{i in S} x_i prod_{j not in S} (1 - x_j)`` by enumeration."""
    if f.n > MAX_ENUMERATION_N:
        raise CapabilityError(
            f"exact multilinear evaluation enumerates 2^n subsets and is capped at n={MAX_ENUMERATION_N}; "
            "use multilinear_eval_sampled"
        )
    return _contract(f.table(), _check_point(x, f.n))


def multilinear_grad_exact(f: SetFunction, x) -> np.ndarray:
    """Partial i is ``F(x; x_i <- 1) - F(x; x_i <- 0)``."""
    if f.n > MAX_ENUMERATION_N:
        raise CapabilityError(
            f"exact multilinear gradient is capped at n={MAX_ENUMERATION_N}; use multilinear_grad_estimate"
        )
    x = _check_point(x, f.n)
    table = f.table()
    g = np.empty(f.n)
    for i in range(f.n):
        hi, lo = x.copy(), x.copy()
        hi[i], lo[i] = 1.0, 0.0
        g[i] = _contract(table, hi) - _contract(table, lo)
    return g


def sample_sets(x: np.ndarray, B: int, rng: np.random.Generator) -> np.ndarray:
    """B independent masks with element i included with probability x_i."""
    return rng.random((B, x.size)) < x


def multilinear_eval_sampled(f: SetFunction, x, B: int, rng: np.random.Generator) -> float:
    if B < 1:
        raise InputError("batch size must be at least 1")
    x = _check_point(x, f.n)
    return float(f.values(sample_sets(x, B, rng)).mean())


def multilinear_grad_estimate(f: SetFunction, x, B: int, rng: np.random.Generator) -> np.ndarray:
    """Average of ``f(S + i) - f(S - i)`` over B sampled sets, one set shared by all i."""
    if B < 1:
        raise InputError("batch size must be at least 1")
    x = _check_point(x, f.n)
    return f.gains(sample_sets(x, B, rng)).mean(axis=0)


class ContinuousObjective:
    """Value and gradient oracles for ``F: [0,1]^n -> R_+``.

    ``sample_cost`` is the number of single set-function computations one
    call to :meth:`grad_sample` performs; analytic objectives report 0.
    """

    n: int
    sigma_bound: float | None = None
    smoothness: float | None = None
    smoothness_norm: str = "l1"
    sample_cost: int = 0

    def value(self, x) -> float:
        raise NotImplementedError

    def value_sample(self, x, rng: np.random.Generator) -> float:
        return self.value(x)

    def grad_exact(self, x) -> np.ndarray:
        raise CapabilityError(f"{type(self).__name__} has no exact gradient oracle")

    def grad_sample(self, x, rng: np.random.Generator) -> np.ndarray:
        return self.grad_exact(x)

    @property
    def has_exact_grad(self) -> bool:
        return True

    @property
    def has_exact_value(self) -> bool:
        return True


class FunctionObjective(ContinuousObjective):
    """Objective assembled from plain callables."""

    def __init__(
        self,
        n: int,
        value: Callable[[np.ndarray], float],
        grad: Callable[[np.ndarray], np.ndarray] | None = None,
        grad_sample: Callable[[np.ndarray, np.random.Generator], np.ndarray] | None = None,
        *,
        sigma_bound: float | None = None,
        smoothness: float | None = None,
        smoothness_norm: str = "l2",
    ):
        self.n = int(n)
        self._value = value
        self._grad = grad
        self._grad_sample = grad_sample
        self.sigma_bound = sigma_bound
        self.smoothness = smoothness
        self.smoothness_norm = smoothness_norm

    def value(self, x):
        return float(self._value(_check_point(x, self.n)))

    def grad_exact(self, x):
        if self._grad is None:
            return super().grad_exact(x)
        return np.asarray(self._grad(_check_point(x, self.n)), dtype=float)

    def grad_sample(self, x, rng):
        if self._grad_sample is None:
            return self.grad_exact(x)
        return np.asarray(self._grad_sample(_check_point(x, self.n), rng), dtype=float)

    @property
    def has_exact_grad(self):
        return self._grad is not None


class MultilinearObjective(ContinuousObjective):
    """``F(x) = E_{i ~ w}[F_i(x)]`` for multilinear extensions ``F_i`` of a family.

    One gradient sample draws ``batch_size`` pairs (member i, set S ~ x) and
    averages ``f_i(S + j) - f_i(S - j)`` over them; this costs ``n * batch_size``
    set-function computations.
    """

    def __init__(self, family: SetFunctionFamily, weights=None, batch_size: int = 1, value_batch: int = 1000):
        if batch_size < 1:
            raise InputError("batch size must be at least 1")
        self.family = family
        self.mean = Mixture(family, weights)
        self.weights = self.mean.weights
        self.n = family.n
        self.batch_size = int(batch_size)
        self.value_batch = int(value_batch)
        self.sample_cost = self.n * self.batch_size
        self._cdf = np.cumsum(self.weights)
        self._uniform = np.allclose(self.weights, self.weights[0])
        self.smoothness_norm = "l1"

    def with_batch(self, batch_size: int) -> "MultilinearObjective":
        return MultilinearObjective(self.family, self.weights, batch_size, self.value_batch)

    @property
    def has_exact_grad(self):
        return self.n <= MAX_ENUMERATION_N

    @property
    def has_exact_value(self):
        return self.n <= MAX_ENUMERATION_N

    def value(self, x):
        return multilinear_eval_exact(self.mean, x)

    def value_sample(self, x, rng):
        return multilinear_eval_sampled(self.mean, x, self.value_batch, rng)

    def grad_exact(self, x):
        return multilinear_grad_exact(self.mean, x)

    def draw_members(self, B: int, rng: np.random.Generator) -> np.ndarray:
        if self._uniform:
            return rng.integers(len(self.family), size=B)
        idx = np.searchsorted(self._cdf, rng.random(B) * self._cdf[-1], side="right")
        return np.minimum(idx, len(self.family) - 1)

    def grad_sample(self, x, rng):
        x = _check_point(x, self.n)
        idx = self.draw_members(self.batch_size, rng)
        masks = sample_sets(x, self.batch_size, rng)
        return self.family.gains_for(idx, masks).mean(axis=0)


def multilinear_objective(f: SetFunction, batch_size: int = 1) -> MultilinearObjective:
    """Multilinear extension of a single set function with sampled gradients."""
    return MultilinearObjective(as_family(f), None, batch_size)


def stochastic_objective(fs, weights=None, batch_size: int = 1) -> MultilinearObjective:
    """Expectation of the multilinear extensions of ``fs`` under ``weights``."""
    return MultilinearObjective(as_family(fs), weights, batch_size)
