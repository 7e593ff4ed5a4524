"""Fine-tuning of an embedding space against relation graphs.

Three modes are provided:

* ``finetune``: gradient descent on a preserve/relate/negate objective —
  anchor every vector near its original position, pull related pairs together,
  and push negated pairs apart with a margin hinge on the chosen distance.
* ``retrofit_faruqui``: the closed-form Jacobi iteration for the quadratic
  anchor-plus-edges objective.
* ``counterfit``: the antonym-push / synonym-pull / structure-preservation
  variant with hinge terms.

All three return fresh spaces; inputs are never mutated.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .glove import EmbeddingSpace
from .graphs import RelationGraph

DISTANCES = ("l1", "l2sq", "cosine")


class TuningDiverged(RuntimeError):
    pass


@dataclass
class TuneConfig:
    w_preserve: float = 1.0
    w_relate: float = 1.0
    w_negate: float = 1.0
    dist_preserve: str = "l2sq"
    dist_relate: str = "cosine"
    dist_negate: str = "cosine"
    margin: float = 1.0
    lr: float = 0.05
    epochs: int = 200
    seed: int = 0

    def __post_init__(self):
        for w in (self.w_preserve, self.w_relate, self.w_negate):
            if w < 0:
                raise ValueError("term weights must be nonnegative")
        if self.margin < 0:
            raise ValueError("margin must be nonnegative")
        for d in (self.dist_preserve, self.dist_relate, self.dist_negate):
            if d not in DISTANCES:
                raise ValueError(f"unknown distance {d!r}; choose from {DISTANCES}")


@dataclass
class CounterfitConfig:
    delta: float = 1.0
    w_push: float = 1.0
    w_pull: float = 1.0
    w_preserve: float = 1.0
    neighborhood_k: int = 10
    lr: float = 0.05

    def __post_init__(self):
        if self.delta < 0:
            raise ValueError("delta must be nonnegative")


@dataclass
class TuneLog:
    rows: list[tuple[int, float, float, float, float]] = field(default_factory=list)

    def to_csv(self) -> str:
        lines = ["epoch,J,J_p,J_r,J_n"]
        for epoch, j, jp, jr, jn in self.rows:
            lines.append(f"{epoch},{j:.17g},{jp:.17g},{jr:.17g},{jn:.17g}")
        return "\n".join(lines) + "\n"


def _pair_distance(U: np.ndarray, V: np.ndarray, which: str):
    """Distances and gradients for rows of U against rows of V.

    Returns (d, gU, gV) with d shape (n,) and gradients shaped like U.
    """
    if which == "l2sq":
        diff = U - V
        d = np.sum(diff * diff, axis=1)
        return d, 2.0 * diff, -2.0 * diff
    if which == "l1":
        diff = U - V
        s = np.sign(diff)
        return np.sum(np.abs(diff), axis=1), s, -s
    if which == "cosine":
        nu = np.linalg.norm(U, axis=1)
        nv = np.linalg.norm(V, axis=1)
        if np.any(nu == 0) or np.any(nv == 0):
            raise ValueError("cosine distance undefined for zero vectors")
        dot = np.sum(U * V, axis=1)
        c = dot / (nu * nv)
        gU = (c / nu**2)[:, None] * U - V / (nu * nv)[:, None]
        gV = (c / nv**2)[:, None] * V - U / (nu * nv)[:, None]
        return 1.0 - c, gU, gV
    raise ValueError(f"unknown distance {which!r}")


def tune_objective(
    Q: np.ndarray,
    Q_hat: np.ndarray,
    relate: RelationGraph,
    negate: RelationGraph,
    cfg: TuneConfig,
) -> tuple[float, np.ndarray, tuple[float, float, float]]:
    """Objective value, analytic gradient wrt Q, and the three term values."""
    grad = np.zeros_like(Q)
    j_p = j_r = j_n = 0.0
    if cfg.w_preserve > 0:
        d, gU, _ = _pair_distance(Q, Q_hat, cfg.dist_preserve)
        j_p = cfg.w_preserve * float(np.sum(d))
        grad += cfg.w_preserve * gU
    if cfg.w_relate > 0 and len(relate):
        i, j, w = relate.arrays()
        d, gU, gV = _pair_distance(Q[i], Q[j], cfg.dist_relate)
        j_r = cfg.w_relate * float(np.sum(w * d))
        coef = (cfg.w_relate * w)[:, None]
        np.add.at(grad, i, coef * gU)
        np.add.at(grad, j, coef * gV)
    if cfg.w_negate > 0 and len(negate):
        i, j, w = negate.arrays()
        d, gU, gV = _pair_distance(Q[i], Q[j], cfg.dist_negate)
        hinge = cfg.margin - d
        active = hinge > 0
        j_n = cfg.w_negate * float(np.sum(w[active] * hinge[active]))
        coef = np.where(active, -cfg.w_negate * w, 0.0)[:, None]
        np.add.at(grad, i, coef * gU)
        np.add.at(grad, j, coef * gV)
    total = j_p + j_r + j_n
    return total, grad, (j_p, j_r, j_n)


def finetune(
    space: EmbeddingSpace,
    relate: RelationGraph,
    negate: RelationGraph,
    cfg: TuneConfig,
    frozen: Sequence[int] | None = None,
    log: TuneLog | None = None,
) -> EmbeddingSpace:
    """Full-batch gradient descent on the preserve/relate/negate objective.

    ``frozen`` rows still participate in distances but are never updated.
    The anchor for the preserve term is the input space itself.
    """
    if space.v == 0:
        raise ValueError("empty embedding space")
    Q_hat = space.vectors
    Q = Q_hat.copy()
    frozen_idx = np.asarray(sorted(frozen), dtype=np.int64) if frozen else None
    for epoch in range(cfg.epochs):
        j, grad, (jp, jr, jn) = tune_objective(Q, Q_hat, relate, negate, cfg)
        if not np.isfinite(j):
            raise TuningDiverged(f"non-finite objective at epoch {epoch}")
        if log is not None:
            log.rows.append((epoch, j, jp, jr, jn))
        if frozen_idx is not None:
            grad[frozen_idx] = 0.0
        Q -= cfg.lr * grad
    return EmbeddingSpace(vectors=Q, vocab=space.vocab)


def retrofit_faruqui(
    space: EmbeddingSpace,
    relate: RelationGraph,
    alpha: float | np.ndarray = 1.0,
    beta: float = 1.0,
    iters: int = 10,
) -> EmbeddingSpace:
    """Jacobi sweeps of q_i <- (a_i q^_i + sum_j b_ij q_j) / (a_i + sum_j b_ij).

    Per-edge coefficient b_ij is ``beta`` times the graph edge weight; each
    undirected edge contributes to both endpoints. Nodes without edges need
    a_i > 0, otherwise the update is undefined.
    """
    Q_hat = space.vectors
    v = space.v
    alpha_arr = np.full(v, float(alpha)) if np.isscalar(alpha) else np.asarray(alpha, dtype=float)
    i, j, w = relate.arrays()
    bw = beta * w
    denom = alpha_arr.copy()
    np.add.at(denom, i, bw)
    np.add.at(denom, j, bw)
    if np.any(denom <= 0):
        bad = int(np.argmin(denom))
        raise ValueError(f"node {bad} has alpha 0 and no edges: update undefined")
    Q = Q_hat.copy()
    for _ in range(iters):
        acc = alpha_arr[:, None] * Q_hat
        np.add.at(acc, i, bw[:, None] * Q[j])
        np.add.at(acc, j, bw[:, None] * Q[i])
        Q = acc / denom[:, None]
    return EmbeddingSpace(vectors=Q, vocab=space.vocab)


def _neighborhoods(Q: np.ndarray, k: int) -> tuple[np.ndarray, np.ndarray]:
    """Index pairs (i, j) for each row's k nearest cosine neighbors."""
    norms = np.linalg.norm(Q, axis=1, keepdims=True)
    normed = Q / np.maximum(norms, 1e-12)
    sim = normed @ normed.T
    np.fill_diagonal(sim, -np.inf)
    k = min(k, Q.shape[0] - 1)
    if k <= 0:
        return np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64)
    nbr = np.argsort(-sim, axis=1, kind="stable")[:, :k]
    i = np.repeat(np.arange(Q.shape[0], dtype=np.int64), k)
    return i, nbr.reshape(-1).astype(np.int64)


def counterfit(
    space: EmbeddingSpace,
    synonyms: RelationGraph,
    antonyms: RelationGraph,
    cfg: CounterfitConfig,
    epochs: int = 100,
) -> EmbeddingSpace:
    """Gradient descent on the three-part hinge objective (cosine distance):

    push:     sum over antonym pairs of max(0, delta - d(u, w))
    pull:     sum over synonym pairs of max(0, d(u, w))
    preserve: sum over original-space neighborhoods of max(0, d'(i,j) - d(i,j))
    """
    Q_hat = space.vectors
    Q = Q_hat.copy()
    ni, nj = _neighborhoods(Q_hat, cfg.neighborhood_k)
    d_orig, _, _ = _pair_distance(Q_hat[ni], Q_hat[nj], "cosine") if len(ni) else (
        np.zeros(0), None, None)
    for epoch in range(epochs):
        grad = np.zeros_like(Q)
        j_total = 0.0
        if cfg.w_push > 0 and len(antonyms):
            i, j, w = antonyms.arrays()
            d, gU, gV = _pair_distance(Q[i], Q[j], "cosine")
            hinge = cfg.delta - d
            active = hinge > 0
            j_total += cfg.w_push * float(np.sum(w[active] * hinge[active]))
            coef = np.where(active, -cfg.w_push * w, 0.0)[:, None]
            np.add.at(grad, i, coef * gU)
            np.add.at(grad, j, coef * gV)
        if cfg.w_pull > 0 and len(synonyms):
            i, j, w = synonyms.arrays()
            d, gU, gV = _pair_distance(Q[i], Q[j], "cosine")
            active = d > 0
            j_total += cfg.w_pull * float(np.sum(w[active] * d[active]))
            coef = np.where(active, cfg.w_pull * w, 0.0)[:, None]
            np.add.at(grad, i, coef * gU)
            np.add.at(grad, j, coef * gV)
        if cfg.w_preserve > 0 and len(ni):
            d, gU, gV = _pair_distance(Q[ni], Q[nj], "cosine")
            hinge = d - d_orig
            active = hinge > 0
            j_total += cfg.w_preserve * float(np.sum(hinge[active]))
            coef = np.where(active, cfg.w_preserve, 0.0)[:, None]
            np.add.at(grad, ni, coef * gU)
            np.add.at(grad, nj, coef * gV)
        if not np.isfinite(j_total):
            raise TuningDiverged(f"non-finite objective at epoch {epoch}")
        Q -= cfg.lr * grad
    return EmbeddingSpace(vectors=Q, vocab=space.vocab)
