"""End-to-end walkthrough on synthetic baskets.

Generates a planted-category catalog, counts co-occurrences, trains
embeddings, fine-tunes with relation graphs, and evaluates replacement
retrieval before and after fine-tuning.
"""

import numpy as np

from basketvec.cooc import build_mco
from basketvec.glove import TrainConfig, finalize, train
from basketvec.graphs import build_negate_graph, build_relate_graph
from basketvec.ingest import build_vocabulary
from basketvec.metrics import GoldCase, GoldSet, evaluate
from basketvec.synth import SynthConfig, generate_baskets, generate_catalog
from basketvec.tune import TuneConfig, finetune

cfg = SynthConfig(n_categories=5, items_per_category=20, n_baskets=5000, seed=42)
catalog = generate_catalog(cfg)
baskets = generate_baskets(catalog, cfg)
vocab = build_vocabulary(baskets, cap=1000)
print(f"{len(catalog)} items, {len(baskets)} baskets, vocabulary {len(vocab)}")

mco = build_mco(baskets, vocab)
print(f"co-occurrence matrix: {len(mco)} entries, {mco.total_pairs:.0f} total pairs")

params, log = train(mco, TrainConfig(dim=32, seed=42))
space = finalize(params, vocab)
print(f"trained {log.epochs_run} epochs in {log.seconds:.1f}s "
      f"(early stop: {log.stopped_early}), final loss {log.loss[-1]:.2f}")

relate = build_relate_graph(catalog, vocab)
negate = build_negate_graph(catalog, vocab, per_item=5, seed=43)
tuned = finetune(space, relate, negate, TuneConfig(epochs=200, seed=42))

# gold set: every same-category item is an accepted replacement
h1 = {m.item_id: m.h1 for m in catalog}
rng = np.random.default_rng(7)
cases = []
for q in rng.choice(vocab.item_of, size=25, replace=False):
    mates = {i for i in vocab.item_of if i != q and h1[i] == h1[q]}
    cases.append(GoldCase(query=q, accepted=mates))
gold = GoldSet(cases=cases)

for label, s in (("pre ", space), ("post", tuned)):
    print(f"{label} {evaluate(s, gold, [1, 5]).machine_line()}")
