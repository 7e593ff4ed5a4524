import math

import numpy as np
import pytest

from basketvec.cooc import CooccurrenceMatrix
from basketvec.glove import (
    EmbeddingSpace,
    GloveParams,
    TrainConfig,
    finalize,
    glove_grad,
    glove_loss,
    init_params,
    load_embeddings,
    save_embeddings,
    train,
    weight_fn,
)
from basketvec.ingest import Vocabulary


def mk_vocab(v):
    items = [f"I{k}" for k in range(v)]
    return Vocabulary(index_of={it: k for k, it in enumerate(items)}, item_of=items)


def random_mco(rng, v, density=0.4):
    entries = {}
    for i in range(v):
        for j in range(i + 1, v):
            if rng.random() < density:
                entries[(i, j)] = float(rng.integers(1, 300))
    return CooccurrenceMatrix(v=v, entries=entries)


class TestWeightFn:
    def test_at_cap(self):
        assert weight_fn(250, 250, 0.75) == 1.0

    def test_above_cap(self):
        assert weight_fn(500, 250, 0.75) == 1.0

    def test_quarter_cap_sqrt(self):
        assert weight_fn(250 / 4, 250, 0.5) == pytest.approx(0.5)

    def test_nonpositive_rejected(self):
        with pytest.raises(ValueError):
            weight_fn(0, 250, 0.75)

    def test_range(self):
        for x in [1, 10, 100, 249, 250, 10_000]:
            assert 0 < weight_fn(x, 250, 0.75) <= 1


class TestInitParams:
    def test_deterministic(self):
        p1 = init_params(5, 4, seed=7)
        p2 = init_params(5, 4, seed=7)
        assert np.array_equal(p1.W, p2.W)
        assert np.array_equal(p1.W_tilde, p2.W_tilde)

    def test_seed_changes_params(self):
        assert not np.array_equal(init_params(5, 4, 1).W, init_params(5, 4, 2).W)

    def test_range_and_zero_biases(self):
        p = init_params(1, 1, seed=0)
        assert -0.5 <= p.W[0, 0] <= 0.5
        assert p.b[0] == 0.0 and p.b_tilde[0] == 0.0


class TestLoss:
    def test_exact_fit_zero_loss(self):
        # Zero vectors, biases splitting ln(e) = 1 symmetrically -> residual 0.
        cfg = TrainConfig(dim=3, seed=0)
        mco = CooccurrenceMatrix(v=2, entries={(0, 1): math.e})
        params = GloveParams(W=np.zeros((2, 3)), W_tilde=np.zeros((2, 3)),
                             b=np.array([0.5, 0.5]), b_tilde=np.array([0.5, 0.5]))
        assert glove_loss(params, mco, cfg) == pytest.approx(0.0)

    def test_empty_mco(self):
        cfg = TrainConfig(dim=2)
        params = init_params(3, 2, 0)
        assert glove_loss(params, CooccurrenceMatrix(v=3, entries={}), cfg) == 0.0

    def test_single_entry_zero_params(self):
        # X = e, all params zero: both orientations give f(e) * (ln e)^2 = f(e).
        mco = CooccurrenceMatrix(v=2, entries={(0, 1): math.e})
        cfg = TrainConfig(dim=2, x_max=250, alpha_exp=0.75)
        params = GloveParams(W=np.zeros((2, 2)), W_tilde=np.zeros((2, 2)),
                             b=np.zeros(2), b_tilde=np.zeros(2))
        expected = 2 * weight_fn(math.e, 250, 0.75)
        assert glove_loss(params, mco, cfg) == pytest.approx(expected)

    def test_nonnegative(self):
        rng = np.random.default_rng(3)
        mco = random_mco(rng, 8)
        cfg = TrainConfig(dim=4)
        params = init_params(8, 4, 3)
        assert glove_loss(params, mco, cfg) >= 0

    def test_permutation_invariance(self):
        rng = np.random.default_rng(5)
        v = 7
        mco = random_mco(rng, v)
        cfg = TrainConfig(dim=3)
        params = init_params(v, 3, 5)
        perm = rng.permutation(v)
        permuted_entries = {}
        for (i, j), x in mco.entries.items():
            a, b = int(perm[i]), int(perm[j])
            permuted_entries[(min(a, b), max(a, b))] = x
        mco_p = CooccurrenceMatrix(v=v, entries=permuted_entries)
        # original index i lands at row perm[i]
        params_p = GloveParams(W=np.empty_like(params.W), W_tilde=np.empty_like(params.W),
                               b=np.empty_like(params.b), b_tilde=np.empty_like(params.b))
        params_p.W[perm] = params.W
        params_p.W_tilde[perm] = params.W_tilde
        params_p.b[perm] = params.b
        params_p.b_tilde[perm] = params.b_tilde
        assert glove_loss(params_p, mco_p, cfg) == pytest.approx(
            glove_loss(params, mco, cfg))


def finite_difference_grad(params, mco, cfg, h=1e-5):
    """Central-difference oracle over every parameter entry."""
    out = GloveParams(W=np.zeros_like(params.W), W_tilde=np.zeros_like(params.W_tilde),
                      b=np.zeros_like(params.b), b_tilde=np.zeros_like(params.b_tilde))
    for name in ("W", "W_tilde", "b", "b_tilde"):
        arr = getattr(params, name)
        garr = getattr(out, name)
        it = np.nditer(arr, flags=["multi_index"])
        for _ in it:
            idx = it.multi_index
            orig = arr[idx]
            arr[idx] = orig + h
            up = glove_loss(params, mco, cfg)
            arr[idx] = orig - h
            down = glove_loss(params, mco, cfg)
            arr[idx] = orig
            garr[idx] = (up - down) / (2 * h)
    return out


class TestGrad:
    def test_zero_at_minimum(self):
        mco = CooccurrenceMatrix(v=2, entries={(0, 1): math.e})
        cfg = TrainConfig(dim=2)
        params = GloveParams(W=np.zeros((2, 2)), W_tilde=np.zeros((2, 2)),
                             b=np.array([0.5, 0.5]), b_tilde=np.array([0.5, 0.5]))
        g = glove_grad(params, mco, cfg)
        for arr in (g.W, g.W_tilde, g.b, g.b_tilde):
            assert np.allclose(arr, 0)

    def test_empty_mco_zero_grad(self):
        cfg = TrainConfig(dim=2)
        g = glove_grad(init_params(3, 2, 0), CooccurrenceMatrix(v=3, entries={}), cfg)
        assert np.allclose(g.W, 0) and np.allclose(g.b, 0)

    def test_matches_finite_differences(self):
        rng = np.random.default_rng(11)
        v, dim = 6, 4
        mco = random_mco(rng, v)
        cfg = TrainConfig(dim=dim, seed=11)
        params = init_params(v, dim, 11)
        params.b[:] = rng.normal(0, 0.1, v)
        params.b_tilde[:] = rng.normal(0, 0.1, v)
        analytic = glove_grad(params, mco, cfg)
        numeric = finite_difference_grad(params, mco, cfg)
        for name in ("W", "W_tilde", "b", "b_tilde"):
            a = getattr(analytic, name)
            n = getattr(numeric, name)
            denom = np.maximum(np.abs(a) + np.abs(n), 1e-8)
            assert np.max(np.abs(a - n) / denom) < 1e-4


class TestTrain:
    def test_loss_decreases(self):
        mco = CooccurrenceMatrix(v=2, entries={(0, 1): 10.0})
        cfg = TrainConfig(dim=4, max_epochs=200, patience=10**9, seed=0)
        params, log = train(mco, cfg)
        assert log.loss[-1] < log.loss[0]

    def test_deterministic(self):
        rng = np.random.default_rng(2)
        mco = random_mco(rng, 10)
        cfg = TrainConfig(dim=4, max_epochs=20, patience=10**9, seed=9)
        p1, _ = train(mco, cfg)
        p2, _ = train(mco, cfg)
        assert np.array_equal(p1.W, p2.W)
        assert np.array_equal(p1.W_tilde, p2.W_tilde)
        assert np.array_equal(p1.b, p2.b)

    def test_empty_mco_rejected(self):
        with pytest.raises(ValueError):
            train(CooccurrenceMatrix(v=3, entries={}), TrainConfig(dim=2))

    def test_epoch_budget_respected(self):
        rng = np.random.default_rng(4)
        mco = random_mco(rng, 6)
        cfg = TrainConfig(dim=2, max_epochs=7, patience=10**9, seed=0)
        _, log = train(mco, cfg)
        assert log.epochs_run <= 7

    def test_full_epoch_never_increases_loss_small_lr(self):
        rng = np.random.default_rng(6)
        mco = random_mco(rng, 8)
        cfg = TrainConfig(dim=4, lr=0.005, max_epochs=30, patience=10**9, seed=1)
        _, log = train(mco, cfg)
        assert all(b <= a + 1e-9 for a, b in zip(log.loss, log.loss[1:]))

    def test_parallel_mode_trains(self):
        rng = np.random.default_rng(8)
        mco = random_mco(rng, 12)
        cfg = TrainConfig(dim=4, max_epochs=30, patience=10**9, seed=3, parallel=True)
        _, log = train(mco, cfg)
        assert log.loss[-1] < log.loss[0]


class TestFinalize:
    def test_zero_context_identity(self):
        p = init_params(4, 3, 0)
        p.W_tilde[:] = 0
        assert np.array_equal(finalize(p, mk_vocab(4)).vectors, p.W)

    def test_opposite_cancels(self):
        p = init_params(4, 3, 0)
        p.W_tilde = -p.W
        assert np.allclose(finalize(p, mk_vocab(4)).vectors, 0)

    def test_elementwise_sum(self):
        p = init_params(5, 2, 1)
        space = finalize(p, mk_vocab(5))
        assert np.array_equal(space.vectors, p.W + p.W_tilde)


class TestEmbeddingIO:
    def test_round_trip_bitexact(self, tmp_path):
        p = init_params(6, 5, 3)
        space = finalize(p, mk_vocab(6))
        path = tmp_path / "emb.txt"
        save_embeddings(space, path)
        loaded = load_embeddings(path)
        assert np.array_equal(loaded.vectors, space.vectors)
        assert loaded.vocab.item_of == space.vocab.item_of

    def test_bad_row_width(self, tmp_path):
        path = tmp_path / "emb.txt"
        path.write_text("1 3\nA 1.0 2.0\n")
        with pytest.raises(ValueError, match="coords"):
            load_embeddings(path)
