"""Projected gradient ascent, mirror ascent and the Frank-Wolfe baseline."""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import CapabilityError, InputError
from .geometry import ConstraintSet, MirrorMap, linear_maximize, project_euclidean, project_kl
from .objectives import ContinuousObjective

ENTROPY_FLOOR = 1e-12
STATIONARITY_RTOL = 1e-6


@dataclass(frozen=True)
class StepSchedule:
    """Step sizes ``mu_t`` for ``t = 1, 2, ...``.

    ``theoretical``: ``1 / (L + (sigma / R) * sqrt(t))``
    ``inverse_sqrt``: ``c / sqrt(t)``
    ``constant``: ``mu``
    """

    kind: str
    L: float = 0.0
    sigma: float = 0.0
    R: float = 1.0
    c: float = 1.0
    mu: float = 1.0

    def __post_init__(self):
        if self.kind == "theoretical":
            if self.L < 0 or self.sigma < 0 or self.R <= 0:
                raise InputError("theoretical schedule needs L >= 0, sigma >= 0, R > 0")
            if self.L == 0 and self.sigma == 0:
                raise InputError("theoretical schedule needs L > 0 or sigma > 0")
        elif self.kind == "inverse_sqrt":
            if self.c <= 0:
                raise InputError("c must be positive")
        elif self.kind == "constant":
            if self.mu <= 0:
                raise InputError("constant step must be positive")
        else:
            raise InputError(f"unknown schedule {self.kind!r}")

    @classmethod
    def theoretical(cls, L: float, sigma: float, R: float) -> "StepSchedule":
        return cls("theoretical", L=L, sigma=sigma, R=R)

    @classmethod
    def inverse_sqrt(cls, c: float) -> "StepSchedule":
        return cls("inverse_sqrt", c=c)

    @classmethod
    def constant(cls, mu: float) -> "StepSchedule":
        return cls("constant", mu=mu)

    def __call__(self, t: int) -> float:
        if t < 1:
            raise InputError("steps are indexed from t = 1")
        if self.kind == "theoretical":
            return 1.0 / (self.L + (self.sigma / self.R) * math.sqrt(t))
        if self.kind == "inverse_sqrt":
            return self.c / math.sqrt(t)
        return self.mu


@dataclass
class Trajectory:
    """Iterates ``x_1 .. x_{T+1}`` plus per-step records.

    ``steps[t-1]``, ``grad_norms[t-1]`` belong to the update that produced
    ``x_{t+1}``. ``evals[t-1]`` is the cumulative number of single
    set-function computations spent to reach ``x_t``; ``times`` holds the
    matching wall-clock seconds.
    """

    iterates: np.ndarray
    steps: np.ndarray
    grad_norms: np.ndarray
    evals: np.ndarray
    values: np.ndarray | None = None
    times: np.ndarray | None = None
    seed: int | None = None
    config: dict = field(default_factory=dict)

    @property
    def T(self) -> int:
        return self.iterates.shape[0] - 1

    @property
    def final(self) -> np.ndarray:
        return self.iterates[-1]

    def x(self, t: int) -> np.ndarray:
        """Iterate ``x_t`` with 1-based t."""
        return self.iterates[t - 1]


def _as_rng(rng) -> tuple[np.random.Generator, int | None]:
    if isinstance(rng, np.random.Generator):
        return rng, None
    if rng is None or isinstance(rng, (int, np.integer)):
        return np.random.default_rng(rng), (None if rng is None else int(rng))
    raise InputError("rng must be a numpy Generator, an integer seed, or None")


def _gradient_oracle(F: ContinuousObjective, exact: bool):
    if exact:
        if not F.has_exact_grad:
            raise CapabilityError("exact gradients requested but the objective has no exact oracle")
        return (lambda x, rng: F.grad_exact(x)), 0
    return F.grad_sample, F.sample_cost


def _run(
    F: ContinuousObjective,
    T: int,
    schedule: StepSchedule,
    x1: np.ndarray,
    rng,
    update: Callable[[np.ndarray, float, np.ndarray], np.ndarray],
    exact: bool,
    record_values: bool,
    config: dict,
) -> Trajectory:
    if T < 1:
        raise InputError("T must be at least 1")
    gen, seed = _as_rng(rng)
    oracle, cost = _gradient_oracle(F, exact)
    xs = np.empty((T + 1, F.n))
    steps = np.empty(T)
    norms = np.empty(T)
    times = np.zeros(T + 1)
    xs[0] = x1
    x = xs[0]
    start = time.perf_counter()
    for t in range(1, T + 1):
        g = oracle(x, gen)
        mu = schedule(t)
        x = update(x, mu, g)
        xs[t] = x
        steps[t - 1] = mu
        norms[t - 1] = float(np.linalg.norm(g))
        times[t] = time.perf_counter() - start
    values = np.array([F.value(v) for v in xs]) if record_values else None
    evals = np.arange(T + 1, dtype=np.int64) * cost
    return Trajectory(xs, steps, norms, evals, values, times, seed, config)


def _check_start(K: ConstraintSet, x1) -> np.ndarray:
    x1 = np.asarray(x1, dtype=float)
    if not K.contains(x1):
        raise InputError("start point is not in the constraint set")
    return x1.copy()


def sga(
    F: ContinuousObjective,
    K: ConstraintSet,
    T: int,
    schedule: StepSchedule,
    x1=None,
    rng=None,
    *,
    exact: bool = False,
    record_values: bool = False,
) -> Trajectory:
    """Projected (stochastic) gradient ascent: ``x <- P_K(x + mu_t g_t)``.

    ``x1`` defaults to ``K.center()``. With ``exact=True`` the exact gradient
    oracle is used instead of sampled gradients.
    """
    x1 = _check_start(K, K.center() if x1 is None else x1)

    def update(x, mu, g):
        return project_euclidean(K, x + mu * g)

    config = {"solver": "sga", "T": T, "schedule": schedule, "exact": exact}
    return _run(F, T, schedule, x1, rng, update, exact, record_values, config)


def sma(
    F: ContinuousObjective,
    K: ConstraintSet,
    T: int,
    schedule: StepSchedule,
    mirror: MirrorMap,
    rng=None,
    *,
    x1=None,
    exact: bool = False,
    record_values: bool = False,
) -> Trajectory:
    """(Stochastic) mirror ascent.

    With the Euclidean map this is :func:`sga` update for update. With the
    entropy map ``k * sum x log x`` on the scaled simplex the step is
    multiplicative, ``y_i = x_i * exp(mu_t * g_i / k)``, followed by a KL
    projection. The start defaults to the minimizer of the potential over K.
    """
    mirror.check_compatible(K)
    x1 = _check_start(K, mirror.argmin(K) if x1 is None else x1)

    if mirror.kind == "euclidean":

        def update(x, mu, g):
            return project_euclidean(K, x + mu * g)

    else:
        k = mirror.k

        def update(x, mu, g):
            logy = np.log(np.maximum(x, ENTROPY_FLOOR)) + mu * g / k
            # the capped-simplex KL projection is invariant to rescaling y
            y = np.maximum(np.exp(logy - logy.max()), np.finfo(float).tiny)
            return project_kl(K, y)

    config = {"solver": "sma", "T": T, "schedule": schedule, "mirror": mirror.kind, "exact": exact}
    return _run(F, T, schedule, x1, rng, update, exact, record_values, config)


def frank_wolfe(
    F: ContinuousObjective,
    K: ConstraintSet,
    T: int,
    rng=None,
    *,
    batch_size: int | None = None,
    exact: bool = False,
    record_values: bool = False,
) -> Trajectory:
    """Stochastic Frank-Wolfe from the origin: ``x <- x + (1/T) * argmax_{v in K} <v, g_t>``.

    ``batch_size`` overrides the objective's own batch size when it supports
    ``with_batch``.
    """
    if not K.contains_origin:
        raise CapabilityError(
            f"Frank-Wolfe starts at the origin, which is not in the {K.kind} body; "
            "use a body with an inequality budget"
        )
    if T < 1:
        raise InputError("T must be at least 1")
    if batch_size is not None:
        if not hasattr(F, "with_batch"):
            raise CapabilityError(f"{type(F).__name__} has no configurable batch size")
        F = F.with_batch(batch_size)

    def update(x, mu, g):
        return x + mu * linear_maximize(K, g)

    config = {"solver": "frank_wolfe", "T": T, "exact": exact}
    return _run(F, T, StepSchedule.constant(1.0 / T), np.zeros(K.n), rng, update, exact, record_values, config)


def sample_index(T: int, rule: str, rng: np.random.Generator) -> int:
    """Draw the 1-based output index tau in ``{1..T}``.

    ``uniform``: each index with probability 1/T.
    ``endpoint``: 1 and T with probability 1/(2(T-1)) each, the rest 1/(T-1).
    """
    if T < 1:
        raise InputError("empty trajectory")
    if rule == "uniform":
        return int(rng.integers(1, T + 1))
    if rule == "endpoint":
        if T < 3:
            raise InputError("endpoint-weighted sampling needs T >= 3")
        p = np.full(T, 1.0 / (T - 1))
        p[0] = p[-1] = 1.0 / (2 * (T - 1))
        return int(rng.choice(T, p=p)) + 1
    raise InputError(f"unknown output rule {rule!r}")


def sample_output(traj: Trajectory, rule: str = "uniform", rng=None) -> np.ndarray:
    gen, _ = _as_rng(rng)
    return traj.x(sample_index(traj.T, rule, gen))


def stationarity_gap(F: ContinuousObjective, K: ConstraintSet, x, grad=None) -> float:
    """``max_{y in K} <grad F(x), y - x>``; non-negative up to rounding."""
    x = np.asarray(x, dtype=float)
    if not K.contains(x):
        raise InputError("stationarity is only defined for feasible points")
    g = F.grad_exact(x) if grad is None else np.asarray(grad, dtype=float)
    return float(g @ (linear_maximize(K, g) - x))


def is_stationary(F: ContinuousObjective, K: ConstraintSet, x, grad=None) -> bool:
    g = F.grad_exact(x) if grad is None else np.asarray(grad, dtype=float)
    return stationarity_gap(F, K, x, g) <= STATIONARITY_RTOL * (1 + float(np.linalg.norm(g)))


def stationary_value_bound(gamma: float, opt: float) -> float:
    """Guaranteed floor ``gamma^2 / (1 + gamma^2) * OPT`` at any stationary point."""
    if not 0 < gamma <= 1:
        raise InputError("gamma must lie in (0, 1]")
    if opt < 0:
        raise InputError("OPT must be non-negative")
    return gamma * gamma / (1 + gamma * gamma) * opt


def estimate_sigma(F: ContinuousObjective, x, rng, draws: int = 100) -> float:
    """Root mean squared deviation of ``grad_sample`` around the true gradient.

    Uses the exact gradient when available and the pilot mean otherwise.
    """
    gen, _ = _as_rng(rng)
    G = np.array([F.grad_sample(x, gen) for _ in range(draws)])
    center = F.grad_exact(x) if F.has_exact_grad else G.mean(axis=0)
    return float(np.sqrt(np.mean(np.sum((G - center) ** 2, axis=1))))


def run_to_fixed_point(
    F: ContinuousObjective,
    K: ConstraintSet,
    x1,
    step: float,
    *,
    tol: float = 1e-12,
    max_iter: int = 100_000,
) -> tuple[np.ndarray, int]:
    """Exact-gradient projected ascent with a constant step until the iterate stops moving."""
    x = _check_start(K, x1)
    for it in range(1, max_iter + 1):
        nxt = project_euclidean(K, x + step * F.grad_exact(x))
        moved = float(np.max(np.abs(nxt - x)))
        x = nxt
        if moved <= tol:
            return x, it
    return x, max_iter
