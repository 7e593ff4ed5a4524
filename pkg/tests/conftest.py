import numpy as np
import pytest

from basketvec import (
    TrainConfig,
    TuneConfig,
    build_mco,
    build_negate_graph,
    build_relate_graph,
    build_vocabulary,
    finalize,
    finetune,
    train,
)
from basketvec.synth import SynthConfig, generate_baskets, generate_catalog


@pytest.fixture(scope="session")
def fixture_data():
    """Shared synthetic dataset: 10 categories x 50 items, 20k baskets."""
    cfg = SynthConfig(
        n_categories=10, items_per_category=50, n_baskets=20_000,
        basket_size=(2, 6), intra_affinity=0.9, seed=42,
    )
    catalog = generate_catalog(cfg)
    baskets = generate_baskets(catalog, cfg)
    vocab = build_vocabulary(baskets, 13_000)
    mco = build_mco(baskets, vocab)
    return {"cfg": cfg, "catalog": catalog, "baskets": baskets, "vocab": vocab, "mco": mco}


@pytest.fixture(scope="session")
def category_of(fixture_data):
    h1 = {m.item_id: m.h1 for m in fixture_data["catalog"]}
    return np.array([h1[i] for i in fixture_data["vocab"].item_of])


@pytest.fixture(scope="session")
def trained(fixture_data):
    """Early-stopped run at dim 32 on the shared fixture."""
    cfg = TrainConfig(dim=32, max_epochs=250_000, seed=42)
    params, log = train(fixture_data["mco"], cfg)
    return finalize(params, fixture_data["vocab"]), log


@pytest.fixture(scope="session")
def snapshot_space(fixture_data):
    """Single-epoch snapshot: a deliberately rough space with mixed neighbors,
    standing in for a raw space trained on noisy real data."""
    cfg = TrainConfig(dim=32, max_epochs=1, patience=10**9, seed=42)
    params, _ = train(fixture_data["mco"], cfg)
    return finalize(params, fixture_data["vocab"])


@pytest.fixture(scope="session")
def tuned_space(fixture_data, snapshot_space):
    relate = build_relate_graph(fixture_data["catalog"], fixture_data["vocab"])
    negate = build_negate_graph(
        fixture_data["catalog"], fixture_data["vocab"], per_item=5, seed=44
    )
    return finetune(snapshot_space, relate, negate, TuneConfig(lr=0.05, epochs=200))
