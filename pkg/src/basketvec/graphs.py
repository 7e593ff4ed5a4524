"""Relation graphs over vocabulary indices, derived from category metadata.

The relate graph connects items whose full (h1, h2) category tuple matches,
both levels assigned (nonzero). The negate graph samples cross-category
partners per item. Edges are undirected, stored once under (i, j) with i < j.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .ingest import ItemMeta, Vocabulary
from .util import atomic_write, fmt


@dataclass
class RelationGraph:
    kind: str  # "relate" | "negate"
    edges: dict[tuple[int, int], float] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.edges)

    def add(self, i: int, j: int, weight: float = 1.0) -> None:
        if i == j:
            raise ValueError(f"self-edge on index {i}")
        if weight <= 0:
            raise ValueError(f"edge weight must be positive, got {weight}")
        if i > j:
            i, j = j, i
        self.edges[(i, j)] = weight

    def arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        keys = sorted(self.edges)
        i = np.array([k[0] for k in keys], dtype=np.int64)
        j = np.array([k[1] for k in keys], dtype=np.int64)
        w = np.array([self.edges[k] for k in keys], dtype=np.float64)
        return i, j, w


def build_relate_graph(catalog: Iterable[ItemMeta], vocab: Vocabulary) -> RelationGraph:
    """Edge (i, j, 1.0) iff both items share the same nonzero (h1, h2) pair."""
    groups: dict[tuple[int, int], list[int]] = {}
    for meta in catalog:
        if meta.item_id not in vocab.index_of:
            continue
        if meta.h1 == 0 or meta.h2 == 0:
            continue
        groups.setdefault((meta.h1, meta.h2), []).append(vocab.index_of[meta.item_id])
    graph = RelationGraph(kind="relate")
    for members in groups.values():
        members.sort()
        for a in range(len(members)):
            for b in range(a + 1, len(members)):
                graph.add(members[a], members[b], 1.0)
    return graph


def build_negate_graph(
    catalog: Iterable[ItemMeta],
    vocab: Vocabulary,
    per_item: int = 5,
    seed: int = 0,
) -> RelationGraph:
    """For each item, sample ``per_item`` partners with a different h1."""
    if per_item < 0:
        raise ValueError("per_item must be >= 0")
    graph = RelationGraph(kind="negate")
    if per_item == 0:
        return graph
    in_vocab = sorted(
        (m for m in catalog if m.item_id in vocab.index_of),
        key=lambda m: vocab.index_of[m.item_id],
    )
    h1_of = {vocab.index_of[m.item_id]: m.h1 for m in in_vocab}
    indices = np.array(sorted(h1_of), dtype=np.int64)
    h1s = np.array([h1_of[i] for i in indices], dtype=np.int64)
    rng = np.random.default_rng(seed)
    for pos, idx in enumerate(indices):
        candidates = indices[h1s != h1s[pos]]
        if len(candidates) == 0:
            continue
        k = min(per_item, len(candidates))
        picked = rng.choice(candidates, size=k, replace=False)
        for other in picked:
            graph.add(int(idx), int(other), 1.0)
    return graph


def graph_from_pairs(
    pairs: Sequence[tuple[str, str]],
    vocab: Vocabulary,
    kind: str = "relate",
    extra: dict[str, int] | None = None,
) -> RelationGraph:
    """Explicit-edge graph from item_id pairs; ``extra`` maps ids outside the
    vocabulary (e.g. a not-yet-registered item) to their row index."""
    extra = extra or {}

    def resolve(item_id: str) -> int:
        if item_id in vocab.index_of:
            return vocab.index_of[item_id]
        if item_id in extra:
            return extra[item_id]
        raise KeyError(f"unknown item_id {item_id!r}")

    graph = RelationGraph(kind=kind)
    for a, b in pairs:
        ia, ib = resolve(a), resolve(b)
        if ia == ib:
            raise ValueError(f"self-edge on item {a!r}")
        graph.add(ia, ib, 1.0)
    return graph


def save_graph(graph: RelationGraph, vocab: Vocabulary, path: str | Path) -> None:
    lines = [f"#kind {graph.kind}"]
    for (i, j), w in sorted(graph.edges.items()):
        lines.append(f"{vocab.item_of[i]} {vocab.item_of[j]} {fmt(w)}")
    atomic_write(path, "\n".join(lines) + "\n")


def load_graph(path: str | Path, vocab: Vocabulary) -> RelationGraph:
    path = Path(path)
    with path.open(encoding="utf-8") as fh:
        header = fh.readline().split()
        if len(header) != 2 or header[0] != "#kind" or header[1] not in ("relate", "negate"):
            raise ValueError(f"{path}: expected header '#kind relate|negate'")
        graph = RelationGraph(kind=header[1])
        for lineno, line in enumerate(fh, start=2):
            if not line.strip():
                continue
            parts = line.split()
            if len(parts) != 3:
                raise ValueError(f"{path}:{lineno}: expected 'id_a id_b weight'")
            a, b, w = parts[0], parts[1], float(parts[2])
            graph.add(vocab.index_of[a], vocab.index_of[b], w)
    return graph
