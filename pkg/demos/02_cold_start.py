"""Placing a brand-new item into an existing embedding space.

Trains a small space, then introduces an item that has never appeared in a
basket: it starts at the centroid of its category and is refined toward a few
known similar items, with every existing vector frozen. Finally the item is
registered so it can serve replacement queries.
"""

import numpy as np

from basketvec.coldstart import ColdStartRequest, cold_start_item, register_item
from basketvec.cooc import build_mco
from basketvec.glove import TrainConfig, finalize, train
from basketvec.ingest import ItemMeta, build_vocabulary
from basketvec.space import top_k_neighbors
from basketvec.synth import SynthConfig, generate_baskets, generate_catalog
from basketvec.tune import TuneConfig

cfg = SynthConfig(n_categories=4, items_per_category=15, n_baskets=3000, seed=1)
catalog = generate_catalog(cfg)
baskets = generate_baskets(catalog, cfg)
vocab = build_vocabulary(baskets, cap=1000)
params, _ = train(mco := build_mco(baskets, vocab), TrainConfig(dim=16, seed=1))
space = finalize(params, vocab)

# the new item belongs to category 2; D = its category mates, S = two items
# the merchandiser flags as close substitutes
category = [m.item_id for m in catalog if m.h1 == 2 and m.item_id in vocab.index_of]
req = ColdStartRequest(
    d_items=category,
    s_items=category[:2],
    tune=TuneConfig(w_negate=0, epochs=200),
)
vec = cold_start_item(space, req)
centroid = space.vectors[[vocab.index_of[i] for i in category]].mean(axis=0)
print(f"distance moved from category centroid: {np.linalg.norm(vec - centroid):.4f}")

meta = ItemMeta(item_id="NEW001", ide=999999, name="BRAND NEW ITEM", h1=2, h2=200)
extended = register_item(space, meta, vec)

h1 = {m.item_id: m.h1 for m in catalog}
neighbors = top_k_neighbors(extended, "NEW001", 10)
same = [h1.get(extended.vocab.item_of[i]) == 2 for i, _ in neighbors.entries]
print(f"top-10 neighbors of NEW001 in its own category: {sum(same)}/10")
for rank, (idx, dist) in enumerate(neighbors.entries[:5], 1):
    print(f"  {rank}. {extended.vocab.item_of[idx]}  cos-dist {dist:.4f}")
