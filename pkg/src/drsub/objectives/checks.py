"""Numerical verifiers for submodularity, DR-submodularity and smoothness."""
from __future__ import annotations

import numpy as np

from ..errors import CapabilityError, DiagnosticError, InputError
from .continuous import ContinuousObjective
from .setfunctions import SetFunction

BRUTEFORCE_MAX_N = 12


def check_submodular_bruteforce(
    f: SetFunction,
    *,
    monotone: bool = False,
    tol: float = 1e-9,
    samples: int | None = None,
    rng: np.random.Generator | None = None,
) -> bool:
    """Check ``f(A) + f(B) >= f(A | B) + f(A & B)`` over all pairs of subsets.

    For ``n > 12`` exhaustive checking is refused unless ``samples`` is given,
    in which case that many random pairs are tested instead. With
    ``monotone=True`` the check also requires ``f(A) <= f(A + i)``.
    """
    n = f.n
    if n > BRUTEFORCE_MAX_N:
        if samples is None:
            raise CapabilityError(
                f"exhaustive pair check is capped at n={BRUTEFORCE_MAX_N}; pass samples= for a randomized check"
            )
        return _check_sampled(f, samples, rng or np.random.default_rng(0), monotone, tol)

    t = f.table()
    codes = np.arange(1 << n)
    for a in range(1 << n):
        if np.any(t[a] + t < t[a | codes] + t[a & codes] - tol):
            return False
    if monotone:
        for i in range(n):
            if np.any(t[codes | (1 << i)] < t - tol):
                return False
    return True


def _check_sampled(f, samples, rng, monotone, tol):
    A = rng.random((samples, f.n)) < rng.random((samples, 1))
    B = rng.random((samples, f.n)) < rng.random((samples, 1))
    lhs = f.values(A) + f.values(B)
    rhs = f.values(A | B) + f.values(A & B)
    if np.any(lhs < rhs - tol):
        return False
    if monotone and np.any(f.values(A | B) < f.values(A) - tol):
        return False
    return True


def check_dr_crossderiv(F: ContinuousObjective, x, h: float = 1e-3, tol: float | None = None) -> bool:
    """True when every second partial of F at x (diagonal included) is non-positive.

    Uses central differences with step h; x must keep a margin of h to the
    box boundary.
    """
    x = np.asarray(x, dtype=float)
    if np.any(x - h < 0) or np.any(x + h > 1):
        raise InputError(f"x must lie inside the box with margin h={h}")
    if tol is None:
        tol = 1e-6 + h * h
    n = x.size
    f0 = F.value(x)
    eye = np.eye(n) * h
    for i in range(n):
        d2 = (F.value(x + eye[i]) - 2 * f0 + F.value(x - eye[i])) / (h * h)
        if d2 > tol:
            return False
        for j in range(i + 1, n):
            d2 = (
                F.value(x + eye[i] + eye[j])
                - F.value(x + eye[i] - eye[j])
                - F.value(x - eye[i] + eye[j])
                + F.value(x - eye[i] - eye[j])
            ) / (4 * h * h)
            if d2 > tol:
                return False
    return True


def estimate_gamma(F: ContinuousObjective, num_pairs: int, rng: np.random.Generator) -> float:
    """Empirical weak-DR parameter: min over sampled ``x <= y`` of ``grad_i(x) / grad_i(y)``.

    The pair ``(0, 1)`` is always included. Coordinates with
    ``grad_i(y) <= 1e-12`` are skipped; the result is clamped to ``[0, 1]``.
    """
    n = F.n
    xs = [np.zeros(n)]
    ys = [np.ones(n)]
    for _ in range(num_pairs):
        x = rng.random(n)
        xs.append(x)
        ys.append(x + rng.random(n) * (1 - x))
    best = np.inf
    for x, y in zip(xs, ys):
        gx, gy = F.grad_exact(x), F.grad_exact(y)
        ok = gy > 1e-12
        if np.any(ok):
            best = min(best, float(np.min(gx[ok] / gy[ok])))
    if not np.isfinite(best):
        raise DiagnosticError("no coordinate had a positive gradient at the upper point of any pair")
    return float(np.clip(best, 0.0, 1.0))


def smoothness_bound_l1(f: SetFunction) -> float:
    """Largest singleton value, an l1-smoothness constant of the multilinear extension."""
    return float(np.max(f.singletons()))
