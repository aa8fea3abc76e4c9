"""Ratings ingestion and a seeded synthetic ratings generator."""
from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..errors import DataError, InputError
from ..objectives import RatingsMatrix

FORMATS = ("movielens-1m", "tsv")


@dataclass
class ParseReport:
    lines: int
    parsed: int
    skipped: int
    n_users: int
    n_items: int
    max_rating: float

    def __str__(self):
        return (
            f"lines={self.lines} parsed={self.parsed} skipped={self.skipped} "
            f"users={self.n_users} items={self.n_items} max_rating={self.max_rating:g}"
        )


def _parse_line(line: str, fmt: str):
    if fmt == "movielens-1m":
        parts = line.split("::")
        if len(parts) != 4:
            return None
    else:
        parts = re.split(r"\s+", line)
        if len(parts) != 3:
            return None
    try:
        rating = float(parts[2])
        return int(parts[0]), int(parts[1]), rating
    except ValueError:
        return None


def load_ratings(path, fmt: str = "movielens-1m") -> tuple[RatingsMatrix, ParseReport]:
    """Parse a ratings file into a dense matrix with 0-based user and item indices.

    Ids are remapped to dense indices in increasing id order. Malformed lines
    and negative or non-finite ratings are skipped and counted.
    """
    if fmt not in FORMATS:
        raise InputError(f"unknown ratings format {fmt!r}; expected one of {FORMATS}")
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise DataError(f"cannot read ratings file {path}: {exc}") from exc

    triples = []
    lines = skipped = 0
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        lines += 1
        rec = _parse_line(line, fmt)
        if rec is None or not np.isfinite(rec[2]) or rec[2] < 0:
            skipped += 1
            continue
        triples.append(rec)
    if not triples:
        raise DataError(f"no valid rating lines in {path}")

    users = sorted({u for u, _, _ in triples})
    items = sorted({i for _, i, _ in triples})
    uidx = {u: j for j, u in enumerate(users)}
    iidx = {i: j for j, i in enumerate(items)}
    R = np.zeros((len(users), len(items)))
    for u, i, r in triples:
        R[uidx[u], iidx[i]] = r
    ratings = RatingsMatrix(R, user_ids=users, item_ids=items)
    report = ParseReport(lines, len(triples), skipped, len(users), len(items), float(R.max()))
    return ratings, report


def synthetic_ratings(
    n_users: int = 500,
    n_items: int = 200,
    density: float = 0.1,
    r_max: int = 5,
    seed: int = 0,
) -> RatingsMatrix:
    """Ratings with skewed item popularity and per-item quality.

    Item j is rated by each user with probability proportional to
    ``(j+1)^-0.8`` (scaled to the requested mean density, capped at 1);
    ratings are integers in ``[1, r_max]`` around an item-specific mean.
    Items are shuffled so popularity does not follow the index.
    """
    if n_users < 1 or n_items < 1:
        raise InputError("need at least one user and one item")
    if not 0 < density <= 1:
        raise InputError("density must lie in (0, 1]")
    rng = np.random.default_rng(seed)
    pop = (np.arange(1, n_items + 1) ** -0.8)[rng.permutation(n_items)]
    p = np.minimum(1.0, pop * density * n_items / pop.sum())
    quality = rng.uniform(1.5, r_max, size=n_items)
    rated = rng.random((n_users, n_items)) < p
    raw = np.rint(quality + rng.normal(0.0, 1.0, size=(n_users, n_items)))
    R = np.where(rated, np.clip(raw, 1, r_max), 0.0)
    return RatingsMatrix(R, r_max=float(r_max))


def write_ratings_tsv(ratings: RatingsMatrix, path) -> int:
    """Write non-zero entries as 1-based ``user item rating`` lines; returns the line count."""
    u, i = np.nonzero(ratings.ratings)
    vals = ratings.ratings[u, i]
    with open(path, "w") as fh:
        for a, b, r in zip(u.tolist(), i.tolist(), vals.tolist()):
            fh.write(f"{a + 1} {b + 1} {r:g}\n")
    return int(u.size)


def load_coverage_file(path) -> tuple[list[list[int]], int]:
    """One subset per line as whitespace-separated 1-based universe elements.

    A ``# universe N`` header fixes the universe size; otherwise the largest
    element is used. Blank lines denote empty subsets.
    """
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise DataError(f"cannot read coverage file {path}: {exc}") from exc
    universe = None
    sets = []
    for raw in text.splitlines():
        line = raw.strip()
        if line.startswith("#"):
            m = re.match(r"#\s*universe\s+(\d+)", line)
            if m:
                universe = int(m.group(1))
            continue
        try:
            sets.append([int(tok) - 1 for tok in line.split()])
        except ValueError as exc:
            raise DataError(f"bad coverage line {raw!r}") from exc
    if not sets:
        raise DataError(f"no subsets in {path}")
    largest = max((max(s) for s in sets if s), default=-1) + 1
    if universe is None:
        universe = largest
    if any(e < 0 for s in sets for e in s) or largest > universe:
        raise DataError("coverage element outside the declared universe")
    return sets, universe
