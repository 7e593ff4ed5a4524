"""Command-line pipeline driver.

Commands read a flat key=value config file (``--config``), with command-line
flags winning over file values. All randomness flows from one top-level seed,
fanned out to the stages by fixed offsets, so a deterministic run is
byte-reproducible end to end.

Artifacts written into the workdir: ``metadata.txt``, ``transactions.txt``,
``vocab.txt``, ``mco.txt``, ``embeddings.pre.txt``, ``embeddings.post.txt``,
``relate.graph``, ``negate.graph``, ``gold.txt``, ``eval.txt``,
``tune_log.csv``.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import cooc, glove, graphs, metrics, synth, tune
from .coldstart import ColdStartRequest, cold_start_item
from .ingest import Vocabulary, build_vocabulary, load_metadata, stream_baskets
from .space import get_item_replacement
from .util import atomic_write, fmt

DEFAULTS = {
    "transactions": "", "metadata": "", "workdir": ".",
    "vocab_cap": "13000",
    "dim": "128", "x_max": "250", "alpha_exp": "0.75", "lr": "0.05",
    "max_epochs": "250000", "patience": "50", "min_improvement": "1e-4",
    "probe_size": "200",
    "negate_per_item": "5",
    "w_preserve": "1", "w_relate": "1", "w_negate": "1", "margin": "1.0",
    "tune_lr": "0.05", "tune_epochs": "200",
    "k_values": "1,5", "gold": "", "gold_cases": "50",
    "n_categories": "10", "items_per_category": "50", "n_baskets": "20000",
    "basket_min": "2", "basket_max": "6", "intra_affinity": "0.9",
    "seed": "42",
}

# Per-stage seed offsets off the top-level seed.
SEED_SYNTH, SEED_TRAIN, SEED_NEGATE, SEED_GOLD = 0, 1, 2, 3


class CliError(RuntimeError):
    pass


def load_config(path: str | None, overrides: dict[str, str]) -> dict[str, str]:
    cfg = dict(DEFAULTS)
    if path:
        p = Path(path)
        if not p.exists():
            raise CliError(f"config file not found: {path}")
        for lineno, raw in enumerate(p.read_text(encoding="utf-8").splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise CliError(f"{path}:{lineno}: expected 'key = value'")
            key, value = (s.strip() for s in line.split("=", 1))
            if key not in DEFAULTS:
                raise CliError(f"{path}:{lineno}: unknown key {key!r}")
            cfg[key] = value
    for key, value in overrides.items():
        if value is not None:
            cfg[key] = str(value)
    return cfg


def _workdir(cfg) -> Path:
    wd = Path(cfg["workdir"])
    wd.mkdir(parents=True, exist_ok=True)
    return wd


def _load_vocab(wd: Path) -> Vocabulary:
    path = wd / "vocab.txt"
    if not path.exists():
        raise CliError(f"missing {path}; run the ingest step first")
    item_of, counts = [], []
    for line in path.read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        item_id, count = line.split()
        item_of.append(item_id)
        counts.append(int(count))
    return Vocabulary(
        index_of={it: k for k, it in enumerate(item_of)},
        item_of=item_of,
        sales_count=np.array(counts, dtype=np.int64),
    )


def _paths(cfg, wd: Path) -> tuple[Path, Path]:
    tx = Path(cfg["transactions"]) if cfg["transactions"] else wd / "transactions.txt"
    md = Path(cfg["metadata"]) if cfg["metadata"] else wd / "metadata.txt"
    return tx, md


def _synth_config(cfg) -> synth.SynthConfig:
    return synth.SynthConfig(
        n_categories=int(cfg["n_categories"]),
        items_per_category=int(cfg["items_per_category"]),
        n_baskets=int(cfg["n_baskets"]),
        basket_size=(int(cfg["basket_min"]), int(cfg["basket_max"])),
        intra_affinity=float(cfg["intra_affinity"]),
        seed=int(cfg["seed"]) + SEED_SYNTH,
    )


def _train_config(cfg, parallel: bool) -> glove.TrainConfig:
    return glove.TrainConfig(
        dim=int(cfg["dim"]),
        x_max=float(cfg["x_max"]),
        alpha_exp=float(cfg["alpha_exp"]),
        lr=float(cfg["lr"]),
        max_epochs=int(cfg["max_epochs"]),
        probe_size=int(cfg["probe_size"]),
        patience=int(cfg["patience"]),
        min_improvement=float(cfg["min_improvement"]),
        seed=int(cfg["seed"]) + SEED_TRAIN,
        parallel=parallel,
    )


def _tune_config(cfg) -> tune.TuneConfig:
    return tune.TuneConfig(
        w_preserve=float(cfg["w_preserve"]),
        w_relate=float(cfg["w_relate"]),
        w_negate=float(cfg["w_negate"]),
        margin=float(cfg["margin"]),
        lr=float(cfg["tune_lr"]),
        epochs=int(cfg["tune_epochs"]),
        seed=int(cfg["seed"]),
    )


def cmd_synth(cfg, args) -> int:
    wd = _workdir(cfg)
    scfg = _synth_config(cfg)
    catalog = synth.generate_catalog(scfg)
    baskets = synth.generate_baskets(catalog, scfg)
    synth.write_metadata(catalog, wd / "metadata.txt")
    synth.write_transactions(baskets, wd / "transactions.txt")
    print(f"synth: {len(catalog)} items, {len(baskets)} baskets -> {wd}")
    return 0


def cmd_ingest(cfg, args) -> int:
    wd = _workdir(cfg)
    tx, md = _paths(cfg, wd)
    catalog = load_metadata(md)
    vocab = build_vocabulary(stream_baskets(tx, catalog), int(cfg["vocab_cap"]))
    lines = [
        f"{item} {int(vocab.sales_count[k])}" for k, item in enumerate(vocab.item_of)
    ]
    atomic_write(wd / "vocab.txt", "\n".join(lines) + "\n")
    print(f"ingest: {len(catalog)} catalog items, vocabulary size {len(vocab)}")
    return 0


def cmd_mco(cfg, args) -> int:
    wd = _workdir(cfg)
    tx, md = _paths(cfg, wd)
    catalog = load_metadata(md)
    vocab = _load_vocab(wd)
    mco = cooc.build_mco(stream_baskets(tx, catalog), vocab)
    cooc.save_mco(mco, wd / "mco.txt")
    print(f"mco: {len(mco)} entries, total pairs {mco.total_pairs:.0f}")
    return 0


def cmd_train(cfg, args) -> int:
    wd = _workdir(cfg)
    mco_path = wd / "mco.txt"
    if not mco_path.exists():
        raise CliError(f"missing {mco_path}; run the mco step first")
    mco = cooc.load_mco(mco_path)
    vocab = _load_vocab(wd)
    tcfg = _train_config(cfg, parallel=getattr(args, "parallel", False))
    params, log = glove.train(mco, tcfg)
    space_pre = glove.finalize(params, vocab)
    glove.save_embeddings(space_pre, wd / "embeddings.pre.txt")
    stop = "early stop" if log.stopped_early else "epoch budget"
    print(
        f"train: {log.epochs_run} epochs ({stop}), final loss {log.loss[-1]:.4f}, "
        f"probe similarity {log.probe_similarity[-1]:.4f}"
    )
    return 0


def cmd_graph(cfg, args) -> int:
    wd = _workdir(cfg)
    _, md = _paths(cfg, wd)
    catalog = load_metadata(md)
    vocab = _load_vocab(wd)
    relate = graphs.build_relate_graph(catalog, vocab)
    negate = graphs.build_negate_graph(
        catalog, vocab, per_item=int(cfg["negate_per_item"]),
        seed=int(cfg["seed"]) + SEED_NEGATE,
    )
    graphs.save_graph(relate, vocab, wd / "relate.graph")
    graphs.save_graph(negate, vocab, wd / "negate.graph")
    print(f"graph: {len(relate)} relate edges, {len(negate)} negate edges")
    return 0


def cmd_tune(cfg, args) -> int:
    wd = _workdir(cfg)
    space_pre = glove.load_embeddings(wd / "embeddings.pre.txt")
    vocab = space_pre.vocab
    relate = graphs.load_graph(wd / "relate.graph", vocab)
    negate = graphs.load_graph(wd / "negate.graph", vocab)
    log = tune.TuneLog()
    space_post = tune.finetune(space_pre, relate, negate, _tune_config(cfg), log=log)
    glove.save_embeddings(space_post, wd / "embeddings.post.txt")
    atomic_write(wd / "tune_log.csv", log.to_csv())
    last = log.rows[-1]
    print(f"tune: {len(log.rows)} epochs, J {last[1]:.4f} "
          f"(preserve {last[2]:.4f}, relate {last[3]:.4f}, negate {last[4]:.4f})")
    return 0


def _load_space(cfg, wd: Path, which: str) -> glove.EmbeddingSpace:
    name = {"pre": "embeddings.pre.txt", "post": "embeddings.post.txt"}.get(which, which)
    path = wd / name if not Path(name).is_absolute() else Path(name)
    if not path.exists():
        raise CliError(f"embeddings file not found: {path}")
    return glove.load_embeddings(path)


def cmd_neighbors(cfg, args) -> int:
    wd = _workdir(cfg)
    space = _load_space(cfg, wd, args.space)
    _, md = _paths(cfg, wd)
    meta = {m.item_id: m for m in load_metadata(md)} if md.exists() else {}
    exclude = set(args.exclude.split(",")) if args.exclude else set()
    if args.item not in space.vocab.index_of:
        raise CliError(f"unknown item_id {args.item!r}")
    result = get_item_replacement(space, args.item, args.k, exclude)
    print("rank,item_id,distance,name,h1")
    for rank, (idx, dist) in enumerate(result.entries, start=1):
        item_id = space.vocab.item_of[idx]
        m = meta.get(item_id)
        name = m.name if m else ""
        h1 = m.h1 if m else ""
        print(f"{rank},{item_id},{dist:.4f},{name},{h1}")
    return 0


def _expand_category(cfg, wd: Path, selector: str) -> list[str]:
    _, md = _paths(cfg, wd)
    try:
        h1, h2 = (int(p) for p in selector.split(":"))
    except ValueError:
        raise CliError(f"bad --category selector {selector!r}; expected H1:H2")
    return [m.item_id for m in load_metadata(md) if m.h1 == h1 and m.h2 == h2]


def cmd_coldstart(cfg, args) -> int:
    wd = _workdir(cfg)
    space = _load_space(cfg, wd, args.space)
    if args.category:
        d_items = [i for i in _expand_category(cfg, wd, args.category)
                   if i in space.vocab.index_of]
    else:
        d_items = args.d.split(",") if args.d else []
    req = ColdStartRequest(
        d_items=d_items,
        n_items=args.n.split(",") if args.n else [],
        s_items=args.s.split(",") if args.s else [],
        tune=_tune_config(cfg),
    )
    v = cold_start_item(space, req)
    atomic_write(wd / "coldstart.txt", " ".join(fmt(x) for x in v) + "\n")
    print(f"coldstart: vector of dim {len(v)} from {len(d_items)} category items "
          f"-> {wd / 'coldstart.txt'}")
    return 0


def _auto_gold(cfg, wd: Path, vocab: Vocabulary) -> metrics.GoldSet:
    """Same-category replacement cases sampled from the catalog."""
    _, md = _paths(cfg, wd)
    catalog = load_metadata(md)
    by_cat: dict[tuple[int, int], list[str]] = {}
    for m in catalog:
        if m.item_id in vocab.index_of and m.h1 != 0 and m.h2 != 0:
            by_cat.setdefault((m.h1, m.h2), []).append(m.item_id)
    eligible = [ids for ids in by_cat.values() if len(ids) >= 2]
    if not eligible:
        raise CliError("no category with >= 2 in-vocabulary items; cannot build gold set")
    rng = np.random.default_rng(int(cfg["seed"]) + SEED_GOLD)
    n_cases = int(cfg["gold_cases"])
    cases = []
    for _ in range(n_cases):
        ids = eligible[int(rng.integers(len(eligible)))]
        query = ids[int(rng.integers(len(ids)))]
        accepted = set(ids) - {query}
        cases.append(metrics.GoldCase(query=query, accepted=accepted))
    return metrics.GoldSet(cases=cases)


def cmd_eval(cfg, args) -> int:
    wd = _workdir(cfg)
    space = _load_space(cfg, wd, args.space)
    k_values = [int(k) for k in cfg["k_values"].split(",")]
    if cfg["gold"]:
        gold = metrics.load_gold_set(cfg["gold"])
    elif (wd / "gold.txt").exists():
        gold = metrics.load_gold_set(wd / "gold.txt")
    else:
        gold = _auto_gold(cfg, wd, space.vocab)
        metrics.save_gold_set(gold, wd / "gold.txt")
    report = metrics.evaluate(space, gold, k_values)
    atomic_write(wd / "eval.txt", report.table() + "\n" + report.machine_line() + "\n")
    print(report.machine_line())
    return 0


def cmd_pipeline(cfg, args) -> int:
    wd = _workdir(cfg)
    if not cfg["transactions"]:
        cmd_synth(cfg, args)
    cmd_ingest(cfg, args)
    cmd_mco(cfg, args)
    cmd_train(cfg, args)
    cmd_graph(cfg, args)
    cmd_tune(cfg, args)
    vocab = _load_vocab(wd)
    k_values = [int(k) for k in cfg["k_values"].split(",")]
    if cfg["gold"]:
        gold = metrics.load_gold_set(cfg["gold"])
    else:
        gold = _auto_gold(cfg, wd, vocab)
        metrics.save_gold_set(gold, wd / "gold.txt")
    pre = metrics.evaluate(_load_space(cfg, wd, "pre"), gold, k_values)
    post = metrics.evaluate(_load_space(cfg, wd, "post"), gold, k_values)
    body = (
        "== before fine-tuning ==\n" + pre.table() + "\n" + pre.machine_line() + "\n"
        "== after fine-tuning ==\n" + post.table() + "\n" + post.machine_line() + "\n"
    )
    atomic_write(wd / "eval.txt", body)
    print(f"pipeline: pre  {pre.machine_line()}")
    print(f"pipeline: post {post.machine_line()}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="basketvec",
        description="Product embeddings from basket co-occurrence: train, tune, query, evaluate.",
    )
    parser.add_argument("--config", help="key=value config file")
    parser.add_argument("--seed", type=int, help="top-level seed override")
    parser.add_argument("--workdir", help="artifact directory override")
    parser.add_argument("--deterministic", action="store_true", default=True,
                        help="bit-reproducible single-writer mode (default)")
    parser.add_argument("--parallel", action="store_true",
                        help="lock-free multi-threaded training (nondeterministic)")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("synth", "ingest", "mco", "train", "graph", "tune", "pipeline"):
        sub.add_parser(name)
    p = sub.add_parser("neighbors")
    p.add_argument("item")
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--space", default="post")
    p.add_argument("--exclude", default="", help="comma-separated item ids to skip")
    p = sub.add_parser("coldstart")
    p.add_argument("--d", default="", help="comma-separated target-category item ids")
    p.add_argument("--category", default="", help="H1:H2 selector expanding to D")
    p.add_argument("--n", default="", help="comma-separated associated item ids")
    p.add_argument("--s", default="", help="comma-separated known-similar item ids")
    p.add_argument("--space", default="post")
    p = sub.add_parser("eval")
    p.add_argument("--space", default="post")
    p.add_argument("--k", type=int, help="single K override")
    return parser


COMMANDS = {
    "synth": cmd_synth, "ingest": cmd_ingest, "mco": cmd_mco, "train": cmd_train,
    "graph": cmd_graph, "tune": cmd_tune, "neighbors": cmd_neighbors,
    "coldstart": cmd_coldstart, "eval": cmd_eval, "pipeline": cmd_pipeline,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    overrides = {"seed": args.seed, "workdir": args.workdir}
    if getattr(args, "k", None):
        overrides["k_values"] = ",".join(
            str(k) for k in sorted({1, args.k})) if args.command == "eval" else None
    try:
        cfg = load_config(args.config, {k: v for k, v in overrides.items() if v is not None})
        return COMMANDS[args.command](cfg, args)
    except (CliError, OSError, KeyError, ValueError, RuntimeError) as exc:
        print(f"basketvec {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
