"""Set functions over the ground set ``{0, ..., n-1}``.

Subsets are passed around as boolean masks. A single mask has shape ``(n,)``;
batched calls take an ``(m, n)`` array. ``SetFunction.__call__`` also accepts
any iterable of element indices.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from ..errors import CapabilityError, InputError

MAX_ENUMERATION_N = 25
_CHUNK = 1 << 14


def as_mask(S, n: int) -> np.ndarray:
    """Convert an index iterable or a mask into a boolean mask of length n."""
    if isinstance(S, np.ndarray) and S.dtype == bool:
        if S.shape != (n,):
            raise InputError(f"mask has shape {S.shape}, expected ({n},)")
        return S
    mask = np.zeros(n, dtype=bool)
    idx = np.fromiter((int(i) for i in S), dtype=np.int64)
    if idx.size and (idx.min() < 0 or idx.max() >= n):
        raise InputError(f"element index out of range for ground set of size {n}")
    mask[idx] = True
    return mask


def all_masks(n: int, start: int = 0, stop: int | None = None) -> np.ndarray:
    """Masks for subset codes ``start..stop-1``; bit i of the code is element i."""
    stop = (1 << n) if stop is None else stop
    codes = np.arange(start, stop, dtype=np.int64)
    return ((codes[:, None] >> np.arange(n)) & 1).astype(bool)


class SetFunction:
    """Value oracle ``f: 2^V -> R_+`` with batched evaluation.

    Subclasses implement :meth:`values`; the other methods have generic
    fallbacks that subclasses override when a closed form is cheap.
    """

    monotone: bool = False
    submodular: bool = False

    def __init__(self, n: int):
        if n < 1:
            raise InputError("ground set must be non-empty")
        self.n = int(n)
        self._table = None

    def values(self, masks: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def value(self, mask: np.ndarray) -> float:
        return float(self.values(np.asarray(mask, dtype=bool)[None, :])[0])

    def __call__(self, S) -> float:
        return self.value(as_mask(S, self.n))

    def gains(self, masks: np.ndarray) -> np.ndarray:
        """Row-wise ``f(S + i) - f(S - i)`` for every element i.

        Returns an array of shape ``(m, n)`` for ``m`` input masks.
        """
        masks = np.atleast_2d(np.asarray(masks, dtype=bool))
        m, n = masks.shape
        eye = np.eye(n, dtype=bool)
        out = np.empty((m, n))
        for r in range(m):
            with_i = masks[r] | eye
            without_i = masks[r] & ~eye
            out[r] = self.values(with_i) - self.values(without_i)
        return out

    def singletons(self) -> np.ndarray:
        return self.values(np.eye(self.n, dtype=bool))

    def table(self) -> np.ndarray:
        """Values of all 2^n subsets, indexed by bit code (bit i = element i)."""
        if self.n > MAX_ENUMERATION_N:
            raise CapabilityError(
                f"exact enumeration is capped at n={MAX_ENUMERATION_N} (got n={self.n}); "
                "use the sampled estimators instead"
            )
        if self._table is None:
            self._table = self._build_table()
        return self._table

    def _build_table(self) -> np.ndarray:
        total = 1 << self.n
        out = np.empty(total)
        for start in range(0, total, _CHUNK):
            stop = min(total, start + _CHUNK)
            out[start:stop] = self.values(all_masks(self.n, start, stop))
        return out

    def __repr__(self):
        return f"{type(self).__name__}(n={self.n})"


class CallableSetFunction(SetFunction):
    """Wrap a plain function of a ``frozenset`` of element indices."""

    def __init__(self, n: int, fn: Callable[[frozenset], float], *, monotone=False, submodular=False):
        super().__init__(n)
        self.fn = fn
        self.monotone = monotone
        self.submodular = submodular

    def values(self, masks):
        masks = np.atleast_2d(masks)
        return np.array([float(self.fn(frozenset(np.flatnonzero(row).tolist()))) for row in masks])


class Modular(SetFunction):
    """``f(S) = sum of w_i over S`` for non-negative weights."""

    monotone = True
    submodular = True

    def __init__(self, weights):
        w = np.asarray(weights, dtype=float)
        if w.ndim != 1 or np.any(w < 0):
            raise InputError("modular weights must be a non-negative vector")
        super().__init__(w.size)
        self.weights = w

    def values(self, masks):
        return np.atleast_2d(masks).astype(float) @ self.weights

    def gains(self, masks):
        masks = np.atleast_2d(masks)
        return np.broadcast_to(self.weights, masks.shape).copy()

    def _build_table(self):
        t = np.zeros(1)
        for w in self.weights:
            t = np.concatenate([t, t + w])
        return t


class Coverage(SetFunction):
    """``f(A) = |union of S_i for i in A|`` over a finite universe."""

    monotone = True
    submodular = True

    def __init__(self, subsets: Sequence[Iterable[int]], universe_size: int):
        universe_size = int(universe_size)
        if universe_size < 0:
            raise InputError("universe size must be non-negative")
        inc = np.zeros((len(subsets), universe_size), dtype=bool)
        for i, s in enumerate(subsets):
            for e in s:
                e = int(e)
                if not 0 <= e < universe_size:
                    raise InputError(f"element {e} of subset {i} outside universe of size {universe_size}")
                inc[i, e] = True
        super().__init__(len(subsets))
        self.incidence = inc
        self.universe_size = universe_size

    def values(self, masks):
        masks = np.atleast_2d(masks)
        counts = masks.astype(np.int32) @ self.incidence.astype(np.int32)
        return (counts > 0).sum(axis=1).astype(float)

    def gains(self, masks):
        masks = np.atleast_2d(masks)
        inc = self.incidence.astype(np.int32)
        counts = masks.astype(np.int32) @ inc  # (m, U)
        # f(S - i): drop i's contribution if selected; f(S + i): add it back
        without = counts[:, None, :] - masks[:, :, None] * inc[None, :, :]
        covered_without = (without > 0).sum(axis=2)
        covered_with = ((without + inc[None, :, :]) > 0).sum(axis=2)
        return (covered_with - covered_without).astype(float)

    def _build_table(self):
        if self.universe_size > 64:
            return super()._build_table()
        bits = (self.incidence.astype(np.uint64) << np.arange(self.universe_size, dtype=np.uint64)).sum(
            axis=1, dtype=np.uint64
        )
        t = np.zeros(1, dtype=np.uint64)
        for b in bits:
            t = np.concatenate([t, t | b])
        return np.bitwise_count(t).astype(float)


def coverage_from_sets(subsets: Sequence[Iterable[int]], universe_size: int) -> Coverage:
    return Coverage(subsets, universe_size)


# --- families of set functions -------------------------------------------------


class SetFunctionFamily:
    """An indexed collection ``f_1..f_m`` sharing one ground set."""

    n: int

    def __len__(self) -> int:
        raise NotImplementedError

    def member(self, i: int) -> SetFunction:
        raise NotImplementedError

    def values_matrix(self, masks: np.ndarray) -> np.ndarray:
        """``out[i, r] = f_i(masks[r])``."""
        masks = np.atleast_2d(masks)
        return np.stack([self.member(i).values(masks) for i in range(len(self))])

    def values_for(self, idx: np.ndarray, masks: np.ndarray) -> np.ndarray:
        """Row r evaluates member ``idx[r]`` on ``masks[r]``."""
        masks = np.atleast_2d(masks)
        return np.array([self.member(int(i)).value(m) for i, m in zip(idx, masks)])

    def gains_for(self, idx: np.ndarray, masks: np.ndarray) -> np.ndarray:
        masks = np.atleast_2d(masks)
        return np.vstack([self.member(int(i)).gains(m[None, :]) for i, m in zip(idx, masks)])

    def subset(self, idx) -> "SetFunctionFamily":
        raise NotImplementedError

    @property
    def monotone(self) -> bool:
        return all(self.member(i).monotone for i in range(len(self)))

    @property
    def submodular(self) -> bool:
        return all(self.member(i).submodular for i in range(len(self)))


class ListFamily(SetFunctionFamily):
    def __init__(self, fs: Sequence[SetFunction]):
        fs = list(fs)
        if not fs:
            raise InputError("a family needs at least one set function")
        ns = {f.n for f in fs}
        if len(ns) != 1:
            raise InputError(f"set functions disagree on ground-set size: {sorted(ns)}")
        self.fs = fs
        self.n = fs[0].n

    def __len__(self):
        return len(self.fs)

    def member(self, i):
        return self.fs[i]

    def gains_for(self, idx, masks):
        masks = np.atleast_2d(masks)
        out = np.empty(masks.shape)
        idx = np.asarray(idx)
        for i in np.unique(idx):
            rows = np.flatnonzero(idx == i)
            out[rows] = self.fs[int(i)].gains(masks[rows])
        return out

    def values_for(self, idx, masks):
        masks = np.atleast_2d(masks)
        out = np.empty(masks.shape[0])
        idx = np.asarray(idx)
        for i in np.unique(idx):
            rows = np.flatnonzero(idx == i)
            out[rows] = self.fs[int(i)].values(masks[rows])
        return out

    def subset(self, idx):
        return ListFamily([self.fs[int(i)] for i in idx])


def as_family(fs) -> SetFunctionFamily:
    if isinstance(fs, SetFunctionFamily):
        return fs
    if isinstance(fs, SetFunction):
        return ListFamily([fs])
    return ListFamily(fs)


class Mixture(SetFunction):
    """Weighted average ``sum_i w_i f_i`` of a family."""

    def __init__(self, family: SetFunctionFamily, weights=None):
        super().__init__(family.n)
        m = len(family)
        if weights is None:
            w = np.full(m, 1.0 / m)
        else:
            w = np.asarray(weights, dtype=float)
            if w.shape != (m,) or np.any(w < 0) or not np.isclose(w.sum(), 1.0, atol=1e-9):
                raise InputError("weights must be a probability vector over the family")
        self.family = family
        self.weights = w
        self.monotone = family.monotone
        self.submodular = family.submodular

    def values(self, masks):
        return self.weights @ self.family.values_matrix(np.atleast_2d(masks))

    def gains(self, masks):
        masks = np.atleast_2d(masks)
        m = masks.shape[0]
        k = len(self.family)
        idx = np.tile(np.arange(k), m)
        g = self.family.gains_for(idx, np.repeat(masks, k, axis=0)).reshape(m, k, self.n)
        return np.einsum("k,mkn->mn", self.weights, g)

    def _build_table(self):
        if isinstance(self.family, ListFamily):
            return sum(w * f.table() for w, f in zip(self.weights, self.family.fs))
        return super()._build_table()


# --- ratings-based objectives --------------------------------------------------


@dataclass
class RatingsMatrix:
    """Dense user-by-item ratings; missing entries are stored as 0."""

    ratings: np.ndarray
    r_max: float | None = None
    user_ids: list = field(default_factory=list)
    item_ids: list = field(default_factory=list)

    def __post_init__(self):
        r = np.asarray(self.ratings, dtype=float)
        if r.ndim != 2 or r.size == 0:
            raise InputError("ratings must be a non-empty 2-d array")
        if np.any(r < 0) or not np.all(np.isfinite(r)):
            raise InputError("ratings must be finite and non-negative")
        self.ratings = r
        if self.r_max is None:
            self.r_max = float(r.max())

    @classmethod
    def from_entries(cls, entries, n_users=None, n_items=None, r_max=None):
        """Build from ``(user, item, rating)`` triples with 0-based indices."""
        entries = list(entries)
        if not entries:
            raise InputError("no rating entries")
        u = np.array([e[0] for e in entries], dtype=np.int64)
        i = np.array([e[1] for e in entries], dtype=np.int64)
        v = np.array([e[2] for e in entries], dtype=float)
        n_users = int(u.max()) + 1 if n_users is None else n_users
        n_items = int(i.max()) + 1 if n_items is None else n_items
        r = np.zeros((n_users, n_items))
        r[u, i] = v
        return cls(r, r_max=r_max)

    @property
    def n_users(self) -> int:
        return self.ratings.shape[0]

    @property
    def n_items(self) -> int:
        return self.ratings.shape[1]

    @property
    def entries(self):
        u, i = np.nonzero(self.ratings)
        return list(zip(u.tolist(), i.tolist(), self.ratings[u, i].tolist()))


class RatingsFamily(SetFunctionFamily):
    """Per-user valuations built from a ratings matrix.

    ``kind="facility"``: ``f_u(S) = max_{j in S} r_uj`` (0 on the empty set).
    ``kind="concave"``: ``f_u(S) = (sum_{j in S} r_uj) ** power``.
    """

    def __init__(self, ratings: RatingsMatrix | np.ndarray, kind: str = "facility", power: float = 0.5):
        if not isinstance(ratings, RatingsMatrix):
            ratings = RatingsMatrix(ratings)
        if kind not in ("facility", "concave"):
            raise InputError(f"unknown ratings valuation {kind!r}")
        if kind == "concave" and not 0 < power <= 1:
            raise InputError("power must lie in (0, 1]")
        self.ratings = ratings
        self.R = ratings.ratings
        self.kind = kind
        self.power = float(power)
        self.n = self.R.shape[1]

    def __len__(self):
        return self.R.shape[0]

    def member(self, i):
        return Mixture(RatingsFamily(self.R[[int(i)]], self.kind, self.power))

    def subset(self, idx):
        return RatingsFamily(self.R[np.asarray(idx, dtype=np.int64)], self.kind, self.power)

    @property
    def monotone(self):
        return True

    @property
    def submodular(self):
        return True

    def _row_values(self, rows: np.ndarray, masks: np.ndarray) -> np.ndarray:
        # rows and masks broadcast against each other along the item axis
        picked = rows * masks
        if self.kind == "facility":
            return picked.max(axis=-1)
        return picked.sum(axis=-1) ** self.power

    def values_matrix(self, masks):
        masks = np.atleast_2d(masks)
        m = masks.shape[0]
        out = np.empty((len(self), m))
        if self.kind == "concave":
            return (self.R @ masks.T.astype(float)) ** self.power
        step = max(1, (1 << 22) // max(1, len(self) * self.n))
        for s in range(0, m, step):
            blk = masks[s : s + step]
            out[:, s : s + step] = (self.R[:, None, :] * blk[None, :, :]).max(axis=2)
        return out

    def values_for(self, idx, masks):
        return self._row_values(self.R[np.asarray(idx, dtype=np.int64)], np.atleast_2d(masks))

    def gains_for(self, idx, masks):
        rows = self.R[np.asarray(idx, dtype=np.int64)]
        masks = np.atleast_2d(masks)
        if self.kind == "concave":
            total = (rows * masks).sum(axis=1, keepdims=True)
            without = total - rows * masks
            return (without + rows) ** self.power - without**self.power
        picked = rows * masks
        top = picked.argmax(axis=1)
        ar = np.arange(rows.shape[0])
        best = picked[ar, top]
        picked[ar, top] = 0.0
        second = picked.max(axis=1)
        without = np.repeat(best[:, None], self.n, axis=1)
        without[ar, top] = second
        return np.maximum(without, rows) - without


def facility_location(R: RatingsMatrix | np.ndarray) -> Mixture:
    """Average over users of the best rating among the chosen items."""
    return Mixture(RatingsFamily(R, "facility"))


def concave_over_modular(R: RatingsMatrix | np.ndarray, power: float = 0.5) -> Mixture:
    """Average over users of ``(sum of chosen ratings) ** power``."""
    if not 0 < power <= 1:
        raise InputError("power must lie in (0, 1]")
    return Mixture(RatingsFamily(R, "concave", power))


def modular(weights) -> Modular:
    return Modular(weights)
