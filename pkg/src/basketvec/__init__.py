"""basketvec: product embeddings from market-basket co-occurrence.

Pipeline: transaction logs -> vocabulary -> co-occurrence matrix ->
log-count weighted least-squares embeddings -> category-graph fine-tuning ->
replacement retrieval, cold start, and MRR/Recall evaluation.
"""

from .cooc import CooccurrenceMatrix, build_mco, load_mco, mco_histogram, save_mco
from .coldstart import ColdStartRequest, cold_start_item, register_item
from .glove import (
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
from .graphs import (
    RelationGraph,
    build_negate_graph,
    build_relate_graph,
    graph_from_pairs,
    load_graph,
    save_graph,
)
from .ingest import (
    Basket,
    IngestStats,
    ItemMeta,
    Vocabulary,
    build_vocabulary,
    load_metadata,
    stream_baskets,
)
from .metrics import (
    EvalReport,
    GoldCase,
    GoldSet,
    evaluate,
    load_gold_set,
    mrr_at_k,
    rank_of,
    recall_at_k,
    save_gold_set,
)
from .space import NeighborList, cosine_distance, get_item_replacement, top_k_neighbors
from .synth import SynthConfig, generate_baskets, generate_catalog
from .tune import (
    CounterfitConfig,
    TuneConfig,
    counterfit,
    finetune,
    retrofit_faruqui,
    tune_objective,
)

__version__ = "0.1.0"
