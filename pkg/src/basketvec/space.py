"""Query layer: cosine distances, exact top-k neighbors, replacement lookup.

All retrieval is an exact vectorized scan; at catalog scale (tens of
thousands of items) this is milliseconds and fully deterministic. Ties are
broken by ascending vocabulary index everywhere.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .glove import EmbeddingSpace


@dataclass
class NeighborList:
    query: int
    entries: list[tuple[int, float]]
    k: int

    def item_ids(self, space: EmbeddingSpace) -> list[str]:
        return [space.vocab.item_of[i] for i, _ in self.entries]


def cosine_distance(u: np.ndarray, v: np.ndarray) -> float:
    """1 - cos(u, v); in [0, 2]. Undefined for zero vectors."""
    nu = np.linalg.norm(u)
    nv = np.linalg.norm(v)
    if nu == 0 or nv == 0:
        raise ValueError("cosine distance undefined for zero vectors")
    return float(1.0 - np.dot(u, v) / (nu * nv))


def _distances_to(space: EmbeddingSpace, idx: int) -> np.ndarray:
    q = space.vectors[idx]
    nq = np.linalg.norm(q)
    if nq == 0:
        raise ValueError(f"query vector {idx} is zero")
    norms = np.linalg.norm(space.vectors, axis=1)
    norms = np.maximum(norms, 1e-300)
    return 1.0 - (space.vectors @ q) / (norms * nq)


def top_k_neighbors(space: EmbeddingSpace, item_id: str, k: int) -> NeighborList:
    """Exact k nearest items by cosine distance, query excluded."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if item_id not in space.vocab.index_of:
        raise KeyError(f"unknown item_id {item_id!r}")
    idx = space.vocab.index_of[item_id]
    dist = _distances_to(space, idx)
    order = np.lexsort((np.arange(space.v), dist))
    entries = [(int(i), float(dist[i])) for i in order if i != idx][:k]
    return NeighborList(query=idx, entries=entries, k=k)


def get_item_replacement(
    space: EmbeddingSpace,
    item_id: str,
    k: int,
    exclude: set[str] | None = None,
) -> NeighborList:
    """Top-k neighbors with excluded ids (e.g. out-of-stock) filtered out."""
    exclude = exclude or set()
    full = top_k_neighbors(space, item_id, k + len(exclude))
    kept = [
        (i, d) for i, d in full.entries if space.vocab.item_of[i] not in exclude
    ][:k]
    return NeighborList(query=full.query, entries=kept, k=k)
