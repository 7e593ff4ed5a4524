"""Replacement-quality scoring: MRR@K and Recall@K against a gold set.

Gold-set file format, one case per line:

    query_item_id|accepted_id_1,accepted_id_2,...|label

A case scores on the first accepted item found in the ranking; a miss within
the top K contributes 0.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from .glove import EmbeddingSpace
from .space import top_k_neighbors
from .util import atomic_write


@dataclass
class GoldCase:
    query: str
    accepted: set[str]
    label: str = ""

    def __post_init__(self):
        if not self.accepted:
            raise ValueError(f"case {self.query!r}: accepted set is empty")
        if self.query in self.accepted:
            raise ValueError(f"case {self.query!r}: query inside its accepted set")


@dataclass
class GoldSet:
    cases: list[GoldCase]

    def __len__(self) -> int:
        return len(self.cases)


@dataclass
class EvalReport:
    k_values: list[int]
    ranks: list[int | None]
    mrr_at: dict[int, float]
    recall_at: dict[int, float]
    skipped_queries: list[str] = field(default_factory=list)

    def machine_line(self) -> str:
        parts = [f"mrr@{k}={self.mrr_at[k]:.6f}" for k in self.k_values]
        parts += [f"recall@{k}={self.recall_at[k]:.6f}" for k in self.k_values]
        return ",".join(parts)

    def table(self) -> str:
        lines = [f"{'K':>4}  {'MRR@K':>8}  {'Recall@K':>8}"]
        for k in self.k_values:
            lines.append(f"{k:>4}  {self.mrr_at[k]:>8.4f}  {self.recall_at[k]:>8.4f}")
        lines.append(f"cases scored: {len(self.ranks)}; skipped: {len(self.skipped_queries)}")
        return "\n".join(lines)


def rank_of(
    space: EmbeddingSpace, query: str, accepted: set[str], k: int
) -> int | None:
    """1-based rank of the first accepted item in the top-k list, else None."""
    neighbors = top_k_neighbors(space, query, k)
    for pos, (idx, _) in enumerate(neighbors.entries, start=1):
        if space.vocab.item_of[idx] in accepted:
            return pos
    return None


def mrr_at_k(ranks: Sequence[int | None], k: int) -> float:
    if not ranks:
        raise ValueError("empty rank list")
    return sum(1.0 / r for r in ranks if r is not None and r <= k) / len(ranks)


def recall_at_k(ranks: Sequence[int | None], k: int) -> float:
    if not ranks:
        raise ValueError("empty rank list")
    return sum(1 for r in ranks if r is not None and r <= k) / len(ranks)


def evaluate(
    space: EmbeddingSpace,
    gold: GoldSet,
    k_values: Sequence[int] = (1, 5),
) -> EvalReport:
    """Rank every case once at max(k_values), then threshold per K.

    Cases whose query is not in the vocabulary are skipped and listed.
    """
    if not k_values:
        raise ValueError("k_values must be non-empty")
    k_values = sorted(set(int(k) for k in k_values))
    kmax = k_values[-1]
    ranks: list[int | None] = []
    skipped: list[str] = []
    for case in gold.cases:
        if case.query not in space.vocab.index_of:
            skipped.append(case.query)
            continue
        ranks.append(rank_of(space, case.query, case.accepted, kmax))
    if not ranks:
        raise ValueError("no gold cases could be scored against this vocabulary")
    return EvalReport(
        k_values=list(k_values),
        ranks=ranks,
        mrr_at={k: mrr_at_k(ranks, k) for k in k_values},
        recall_at={k: recall_at_k(ranks, k) for k in k_values},
        skipped_queries=skipped,
    )


def load_gold_set(path: str | Path) -> GoldSet:
    path = Path(path)
    cases: list[GoldCase] = []
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split("|")
            if len(parts) not in (2, 3):
                raise ValueError(f"{path}:{lineno}: expected 'query|a,b,...|label'")
            accepted = {a.strip() for a in parts[1].split(",") if a.strip()}
            label = parts[2].strip() if len(parts) == 3 else ""
            cases.append(GoldCase(query=parts[0].strip(), accepted=accepted, label=label))
    return GoldSet(cases=cases)


def save_gold_set(gold: GoldSet, path: str | Path) -> None:
    lines = [
        f"{c.query}|{','.join(sorted(c.accepted))}|{c.label}" for c in gold.cases
    ]
    atomic_write(path, "\n".join(lines) + "\n")
