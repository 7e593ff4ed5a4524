"""Cold start: give a brand-new item a usable vector from category metadata.

The new vector starts at the centroid of the target-category items, then is
refined by two optional retrofit passes: first toward the "associated" items,
then toward the "known similar" items. Each pass runs the preserve/relate
fine-tuner with every existing row frozen, so the live space is untouched.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .glove import EmbeddingSpace
from .graphs import RelationGraph
from .ingest import ItemMeta, Vocabulary
from .tune import TuneConfig, finetune


@dataclass
class ColdStartRequest:
    d_items: list[str]
    n_items: list[str] = field(default_factory=list)
    s_items: list[str] = field(default_factory=list)
    tune: TuneConfig = field(default_factory=TuneConfig)


def _resolve(vocab: Vocabulary, items: list[str], what: str) -> list[int]:
    missing = [it for it in items if it not in vocab.index_of]
    if missing:
        raise KeyError(f"unknown {what} item ids: {missing}")
    return [vocab.index_of[it] for it in items]


def cold_start_item(space: EmbeddingSpace, req: ColdStartRequest) -> np.ndarray:
    """Return the new item's vector; the input space is never modified."""
    if not req.d_items:
        raise ValueError("d_items must be non-empty")
    d_idx = _resolve(space.vocab, req.d_items, "target-category")
    n_idx = _resolve(space.vocab, req.n_items, "associated")
    s_idx = _resolve(space.vocab, req.s_items, "similar")

    # Fixed left-to-right summation keeps the centroid bit-reproducible.
    v = np.zeros(space.dim)
    for idx in d_idx:
        v = v + space.vectors[idx]
    v = v / len(d_idx)

    new_row = space.v
    frozen = range(space.v)
    empty = RelationGraph(kind="negate")
    for pull_idx in (n_idx, s_idx):
        if not pull_idx:
            continue
        ext = EmbeddingSpace(
            vectors=np.vstack([space.vectors, v[None, :]]),
            vocab=space.vocab,
        )
        star = RelationGraph(kind="relate")
        for w in pull_idx:
            star.add(new_row, w, 1.0)
        tuned = finetune(ext, star, empty, req.tune, frozen=frozen)
        v = tuned.vectors[new_row].copy()
    return v


def register_item(space: EmbeddingSpace, meta: ItemMeta, v: np.ndarray) -> EmbeddingSpace:
    """Copy-on-extend: new space with one extra row; the original is unchanged."""
    if meta.item_id in space.vocab.index_of:
        raise ValueError(f"item_id {meta.item_id!r} already registered")
    if v.shape != (space.dim,):
        raise ValueError(f"vector shape {v.shape} incompatible with dim {space.dim}")
    vocab = Vocabulary(
        index_of={**space.vocab.index_of, meta.item_id: space.v},
        item_of=[*space.vocab.item_of, meta.item_id],
        sales_count=np.append(space.vocab.sales_count, 0),
    )
    return EmbeddingSpace(
        vectors=np.vstack([space.vectors, v[None, :]]),
        vocab=vocab,
    )
