"""Weighted least-squares embedding training over the co-occurrence matrix.

The objective is the classic log-count regression: for each co-occurring pair
(i, j), counted in both orientations,

    f(x) * (w_i . w~_j + b_i + b~_j - ln x)^2

with f(x) = (x / x_max)^alpha capped at 1. Optimization is AdaGrad over a
shuffled list of symmetric entries; one epoch is one full pass. Early stopping
watches the mean cosine similarity of a probe set of item pairs.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from numba import njit, prange

from .cooc import CooccurrenceMatrix
from .ingest import Vocabulary
from .util import atomic_write, fmt


class TrainingDiverged(RuntimeError):
    pass


@dataclass
class TrainConfig:
    dim: int = 128
    x_max: float = 250.0
    alpha_exp: float = 0.75
    lr: float = 0.05
    max_epochs: int = 250_000
    probe: list[tuple[int, int]] | None = None
    probe_size: int = 200
    patience: int = 50
    min_improvement: float = 1e-4
    seed: int = 0
    parallel: bool = False

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dim must be >= 1")
        if self.x_max <= 0:
            raise ValueError("x_max must be > 0")
        if not 0 < self.alpha_exp <= 1:
            raise ValueError("alpha_exp must be in (0, 1]")
        if self.max_epochs < 1:
            raise ValueError("max_epochs must be >= 1")


@dataclass
class GloveParams:
    W: np.ndarray
    W_tilde: np.ndarray
    b: np.ndarray
    b_tilde: np.ndarray

    @property
    def v(self) -> int:
        return self.W.shape[0]

    @property
    def dim(self) -> int:
        return self.W.shape[1]


@dataclass
class EmbeddingSpace:
    vectors: np.ndarray
    vocab: Vocabulary

    @property
    def v(self) -> int:
        return self.vectors.shape[0]

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]


@dataclass
class TrainLog:
    epochs_run: int = 0
    loss: list[float] = field(default_factory=list)
    probe_similarity: list[float] = field(default_factory=list)
    stopped_early: bool = False
    seconds: float = 0.0


def weight_fn(x: float, x_max: float, alpha_exp: float) -> float:
    """Co-occurrence weighting: (x/x_max)^alpha below the cap, 1 at or above it."""
    if x <= 0:
        raise ValueError(f"count must be positive, got {x}")
    if x >= x_max:
        return 1.0
    return (x / x_max) ** alpha_exp


def init_params(v: int, dim: int, seed: int) -> GloveParams:
    """Uniform init in [-0.5/dim, 0.5/dim]; biases zero; deterministic per seed."""
    if v < 1 or dim < 1:
        raise ValueError("v and dim must be >= 1")
    rng = np.random.default_rng(seed)
    scale = 0.5 / dim
    return GloveParams(
        W=rng.uniform(-scale, scale, size=(v, dim)),
        W_tilde=rng.uniform(-scale, scale, size=(v, dim)),
        b=np.zeros(v),
        b_tilde=np.zeros(v),
    )


def _symmetric_entries(mco: CooccurrenceMatrix, cfg: TrainConfig):
    i, j, x = mco.arrays()
    ii = np.concatenate([i, j])
    jj = np.concatenate([j, i])
    xx = np.concatenate([x, x])
    logx = np.log(xx)
    fw = np.minimum(xx / cfg.x_max, 1.0) ** cfg.alpha_exp
    fw[xx >= cfg.x_max] = 1.0
    return ii, jj, logx, fw


def glove_loss(params: GloveParams, mco: CooccurrenceMatrix, cfg: TrainConfig) -> float:
    ii, jj, logx, fw = _symmetric_entries(mco, cfg)
    if len(ii) == 0:
        return 0.0
    resid = (
        np.einsum("ed,ed->e", params.W[ii], params.W_tilde[jj])
        + params.b[ii]
        + params.b_tilde[jj]
        - logx
    )
    return float(np.sum(fw * resid**2))


def glove_grad(params: GloveParams, mco: CooccurrenceMatrix, cfg: TrainConfig) -> GloveParams:
    """Analytic gradient of glove_loss, packed in a GloveParams of the same shape."""
    gW = np.zeros_like(params.W)
    gWt = np.zeros_like(params.W_tilde)
    gb = np.zeros_like(params.b)
    gbt = np.zeros_like(params.b_tilde)
    ii, jj, logx, fw = _symmetric_entries(mco, cfg)
    if len(ii) > 0:
        resid = (
            np.einsum("ed,ed->e", params.W[ii], params.W_tilde[jj])
            + params.b[ii]
            + params.b_tilde[jj]
            - logx
        )
        g = 2.0 * fw * resid
        np.add.at(gW, ii, g[:, None] * params.W_tilde[jj])
        np.add.at(gWt, jj, g[:, None] * params.W[ii])
        np.add.at(gb, ii, g)
        np.add.at(gbt, jj, g)
    return GloveParams(W=gW, W_tilde=gWt, b=gb, b_tilde=gbt)


@njit(cache=True)
def _epoch_adagrad(W, Wt, b, bt, Gw, Gwt, Gb, Gbt, ii, jj, logx, fw, order, lr):
    dim = W.shape[1]
    total = 0.0
    gw = np.empty(dim)
    gwt = np.empty(dim)
    for t in range(order.shape[0]):
        e = order[t]
        i = ii[e]
        j = jj[e]
        r = b[i] + bt[j] - logx[e]
        for k in range(dim):
            r += W[i, k] * Wt[j, k]
        total += fw[e] * r * r
        g = 2.0 * fw[e] * r
        for k in range(dim):
            gw[k] = g * Wt[j, k]
            gwt[k] = g * W[i, k]
        for k in range(dim):
            Gw[i, k] += gw[k] * gw[k]
            W[i, k] -= lr * gw[k] / np.sqrt(Gw[i, k])
            Gwt[j, k] += gwt[k] * gwt[k]
            Wt[j, k] -= lr * gwt[k] / np.sqrt(Gwt[j, k])
        Gb[i] += g * g
        b[i] -= lr * g / np.sqrt(Gb[i])
        Gbt[j] += g * g
        bt[j] -= lr * g / np.sqrt(Gbt[j])
    return total


@njit(cache=True, parallel=True)
def _epoch_adagrad_parallel(W, Wt, b, bt, Gw, Gwt, Gb, Gbt, ii, jj, logx, fw, lr):
    # Lock-free shard updates; races make the result schedule-dependent.
    dim = W.shape[1]
    n = ii.shape[0]
    total = 0.0
    for e in prange(n):
        i = ii[e]
        j = jj[e]
        r = b[i] + bt[j] - logx[e]
        for k in range(dim):
            r += W[i, k] * Wt[j, k]
        total += fw[e] * r * r
        g = 2.0 * fw[e] * r
        for k in range(dim):
            gw = g * Wt[j, k]
            gwt = g * W[i, k]
            Gw[i, k] += gw * gw
            W[i, k] -= lr * gw / np.sqrt(Gw[i, k])
            Gwt[j, k] += gwt * gwt
            Wt[j, k] -= lr * gwt / np.sqrt(Gwt[j, k])
        Gb[i] += g * g
        b[i] -= lr * g / np.sqrt(Gb[i])
        Gbt[j] += g * g
        bt[j] -= lr * g / np.sqrt(Gbt[j])
    return total


def default_probe(mco: CooccurrenceMatrix, size: int) -> list[tuple[int, int]]:
    """Self-supervised probe: the highest-count entry pairs."""
    ranked = sorted(mco.entries.items(), key=lambda kv: (-kv[1], kv[0]))
    return [key for key, _ in ranked[:size]]


def _probe_similarity(params: GloveParams, probe_i, probe_j) -> float:
    vecs = params.W + params.W_tilde
    u = vecs[probe_i]
    v = vecs[probe_j]
    nu = np.linalg.norm(u, axis=1)
    nv = np.linalg.norm(v, axis=1)
    denom = np.maximum(nu * nv, 1e-12)
    return float(np.mean(np.sum(u * v, axis=1) / denom))


def train(mco: CooccurrenceMatrix, cfg: TrainConfig) -> tuple[GloveParams, TrainLog]:
    """AdaGrad training with cosine-probe early stopping.

    Deterministic mode (default) shuffles with a seeded generator and applies
    updates sequentially, so identical config gives bit-identical results.
    ``cfg.parallel`` switches to the lock-free multi-threaded pass.
    """
    if len(mco.entries) == 0:
        raise ValueError("cannot train on an empty co-occurrence matrix")
    params = init_params(mco.v, cfg.dim, cfg.seed)
    ii, jj, logx, fw = _symmetric_entries(mco, cfg)
    probe = cfg.probe if cfg.probe is not None else default_probe(mco, cfg.probe_size)
    probe_i = np.array([p[0] for p in probe], dtype=np.int64)
    probe_j = np.array([p[1] for p in probe], dtype=np.int64)

    # Accumulators start at 1 so the first step size is exactly lr.
    Gw = np.ones_like(params.W)
    Gwt = np.ones_like(params.W_tilde)
    Gb = np.ones_like(params.b)
    Gbt = np.ones_like(params.b_tilde)

    rng = np.random.default_rng(cfg.seed + 1)
    log = TrainLog()
    best = -np.inf
    stale = 0
    t0 = time.perf_counter()
    for epoch in range(cfg.max_epochs):
        if cfg.parallel:
            loss = _epoch_adagrad_parallel(
                params.W, params.W_tilde, params.b, params.b_tilde,
                Gw, Gwt, Gb, Gbt, ii, jj, logx, fw, cfg.lr,
            )
        else:
            order = rng.permutation(len(ii))
            loss = _epoch_adagrad(
                params.W, params.W_tilde, params.b, params.b_tilde,
                Gw, Gwt, Gb, Gbt, ii, jj, logx, fw, order, cfg.lr,
            )
        if not np.isfinite(loss):
            raise TrainingDiverged(
                f"non-finite loss at epoch {epoch}; lower the learning rate"
            )
        sim = _probe_similarity(params, probe_i, probe_j) if len(probe_i) else 0.0
        log.loss.append(float(loss))
        log.probe_similarity.append(sim)
        log.epochs_run = epoch + 1
        if sim > best + cfg.min_improvement:
            best = sim
            stale = 0
        else:
            stale += 1
            if stale >= cfg.patience:
                log.stopped_early = True
                break
    log.seconds = time.perf_counter() - t0
    return params, log


def finalize(params: GloveParams, vocab: Vocabulary) -> EmbeddingSpace:
    """Sum focal and context matrices into the served vector space."""
    return EmbeddingSpace(vectors=params.W + params.W_tilde, vocab=vocab)


def save_embeddings(space: EmbeddingSpace, path: str | Path) -> None:
    lines = [f"{space.v} {space.dim}"]
    for idx, item_id in enumerate(space.vocab.item_of):
        coords = " ".join(fmt(x) for x in space.vectors[idx])
        lines.append(f"{item_id} {coords}")
    atomic_write(path, "\n".join(lines) + "\n")


def load_embeddings(path: str | Path) -> EmbeddingSpace:
    path = Path(path)
    with path.open(encoding="utf-8") as fh:
        header = fh.readline().split()
        if len(header) != 2:
            raise ValueError(f"{path}: bad header")
        v, dim = int(header[0]), int(header[1])
        vectors = np.zeros((v, dim))
        item_of: list[str] = []
        for row, line in enumerate(fh):
            if not line.strip():
                continue
            parts = line.split()
            if len(parts) != dim + 1:
                raise ValueError(f"{path}: row {row} has {len(parts) - 1} coords, want {dim}")
            item_of.append(parts[0])
            vectors[row] = [float(p) for p in parts[1:]]
    if len(item_of) != v:
        raise ValueError(f"{path}: expected {v} rows, got {len(item_of)}")
    vocab = Vocabulary(
        index_of={it: k for k, it in enumerate(item_of)},
        item_of=item_of,
        sales_count=np.zeros(v, dtype=np.int64),
    )
    return EmbeddingSpace(vectors=vectors, vocab=vocab)
