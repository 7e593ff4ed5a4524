"""Sparse symmetric co-occurrence counts over the item vocabulary.

Each pair is stored once under canonical (i, j) with i < j; the logical matrix
is symmetric with a zero diagonal. Counts are 64-bit.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from pathlib import Path
from typing import Iterable

import numpy as np

from .ingest import Basket, Vocabulary
from .util import atomic_write


@dataclass
class CooccurrenceMatrix:
    v: int
    entries: dict[tuple[int, int], float] = field(default_factory=dict)

    @property
    def total_pairs(self) -> float:
        return sum(self.entries.values())

    def __len__(self) -> int:
        return len(self.entries)

    def get(self, i: int, j: int) -> float:
        if i == j:
            return 0.0
        if i > j:
            i, j = j, i
        return self.entries.get((i, j), 0.0)

    def arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Canonical entries as (i, j, count) arrays sorted by (i, j)."""
        keys = sorted(self.entries)
        i = np.array([k[0] for k in keys], dtype=np.int64)
        j = np.array([k[1] for k in keys], dtype=np.int64)
        x = np.array([self.entries[k] for k in keys], dtype=np.float64)
        return i, j, x


def build_mco(
    baskets: Iterable[Basket],
    vocab: Vocabulary,
    mode: str = "whole-basket",
    window: int = 1,
    weighted: bool = False,
) -> CooccurrenceMatrix:
    """Accumulate pair counts treating each basket as one context.

    ``whole-basket`` (default) increments every unordered pair of distinct
    in-vocabulary items once per basket. ``window`` pairs each focal item with
    context items at positions within ``window``, adding 1 (unweighted) or
    1/distance (weighted) per occurrence.
    """
    if len(vocab) == 0:
        raise ValueError("empty vocabulary")
    if mode not in ("whole-basket", "window"):
        raise ValueError(f"unknown mode {mode!r}")
    if mode == "window" and window < 1:
        raise ValueError(f"window must be >= 1, got {window}")
    entries: dict[tuple[int, int], float] = {}
    for basket in baskets:
        idxs = [vocab.index_of[it] for it in basket.items if it in vocab.index_of]
        if mode == "whole-basket":
            for a, b in combinations(sorted(set(idxs)), 2):
                entries[(a, b)] = entries.get((a, b), 0.0) + 1.0
        else:
            for pos, a in enumerate(idxs):
                for off in range(1, window + 1):
                    if pos + off >= len(idxs):
                        break
                    b = idxs[pos + off]
                    if a == b:
                        continue
                    key = (a, b) if a < b else (b, a)
                    inc = 1.0 / off if weighted else 1.0
                    entries[key] = entries.get(key, 0.0) + inc
    return CooccurrenceMatrix(v=len(vocab), entries=entries)


def mco_histogram(mco: CooccurrenceMatrix, bin_edges: list[float]) -> np.ndarray:
    """Histogram of stored counts; bin k covers [edges[k], edges[k+1])."""
    counts = np.array(list(mco.entries.values()), dtype=np.float64)
    hist, _ = np.histogram(counts, bins=np.asarray(bin_edges, dtype=np.float64))
    return hist


def save_mco(mco: CooccurrenceMatrix, path: str | Path) -> None:
    lines = [f"{mco.v} {mco.total_pairs:.17g}"]
    for (i, j), x in sorted(mco.entries.items()):
        lines.append(f"{i} {j} {x:.17g}")
    atomic_write(path, "\n".join(lines) + "\n")


def load_mco(path: str | Path) -> CooccurrenceMatrix:
    path = Path(path)
    with path.open(encoding="utf-8") as fh:
        header = fh.readline().split()
        if len(header) != 2:
            raise ValueError(f"{path}: bad header")
        v = int(header[0])
        total = float(header[1])
        entries: dict[tuple[int, int], float] = {}
        for lineno, line in enumerate(fh, start=2):
            if not line.strip():
                continue
            parts = line.split()
            if len(parts) != 3:
                raise ValueError(f"{path}:{lineno}: expected 'i j count'")
            i, j, x = int(parts[0]), int(parts[1]), float(parts[2])
            if not 0 <= i < j < v:
                raise ValueError(f"{path}:{lineno}: indices out of range")
            entries[(i, j)] = x
    mco = CooccurrenceMatrix(v=v, entries=entries)
    if abs(mco.total_pairs - total) > 1e-6 * max(1.0, total):
        raise ValueError(f"{path}: header total {total} != sum of entries")
    return mco
