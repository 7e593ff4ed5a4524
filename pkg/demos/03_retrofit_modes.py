"""Comparing the three graph-injection methods on the same trained space.

* finetune      -- preserve/relate/negate gradient descent with a margin hinge
* retrofit      -- Jacobi averaging toward graph neighbors (relate edges only)
* counterfit    -- push antonym pairs apart, pull synonym pairs together,
                   while preserving each item's original nearest-neighborhood

The measure: mean cosine similarity within relate pairs and within negate
pairs, before and after each method.
"""

import numpy as np

from basketvec.cooc import build_mco
from basketvec.glove import TrainConfig, finalize, train
from basketvec.graphs import build_negate_graph, build_relate_graph
from basketvec.ingest import build_vocabulary
from basketvec.synth import SynthConfig, generate_baskets, generate_catalog
from basketvec.tune import (
    CounterfitConfig,
    TuneConfig,
    counterfit,
    finetune,
    retrofit_faruqui,
)

cfg = SynthConfig(n_categories=4, items_per_category=15, n_baskets=3000, seed=2)
catalog = generate_catalog(cfg)
baskets = generate_baskets(catalog, cfg)
vocab = build_vocabulary(baskets, cap=1000)
params, _ = train(build_mco(baskets, vocab), TrainConfig(dim=16, seed=2))
space = finalize(params, vocab)

relate = build_relate_graph(catalog, vocab)
negate = build_negate_graph(catalog, vocab, per_item=5, seed=3)


def mean_pair_sim(s, graph):
    q = s.vectors / np.linalg.norm(s.vectors, axis=1, keepdims=True)
    return float(np.mean([q[i] @ q[j] for (i, j) in graph.edges]))


def show(label, s):
    print(f"{label:12s} relate-pair sim {mean_pair_sim(s, relate):+.3f}   "
          f"negate-pair sim {mean_pair_sim(s, negate):+.3f}")


show("original", space)
show("finetune", finetune(space, relate, negate, TuneConfig(epochs=200, seed=2)))
show("retrofit", retrofit_faruqui(space, relate, alpha=1.0, beta=1.0, iters=10))
show("counterfit", counterfit(space, synonyms=relate, antonyms=negate,
                              cfg=CounterfitConfig(), epochs=100))
