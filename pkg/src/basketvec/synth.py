"""Seeded synthetic catalogs and basket streams with planted category structure.

Each basket either draws all its items from a single category (probability
``intra_affinity``) or uniformly across the catalog, so the strength of the
category signal in the co-occurrence statistics is controllable.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from .ingest import Basket, ItemMeta
from .util import atomic_write

# Shared fixture for demos and the acceptance suite: trains in seconds on CPU.
FIXTURE = dict(
    n_categories=10, items_per_category=50, n_baskets=20_000,
    basket_size=(2, 6), intra_affinity=0.9, seed=42,
)


@dataclass
class SynthConfig:
    n_categories: int = 10
    items_per_category: int = 50
    n_baskets: int = 20_000
    basket_size: tuple[int, int] = (2, 6)
    intra_affinity: float = 0.9
    seed: int = 42

    def __post_init__(self):
        if self.n_categories < 1 or self.items_per_category < 1 or self.n_baskets < 1:
            raise ValueError("sizes must be >= 1")
        if not 0 <= self.intra_affinity <= 1:
            raise ValueError("intra_affinity must be in [0, 1]")
        lo, hi = self.basket_size
        if lo < 1 or hi < lo:
            raise ValueError("basket_size must satisfy 1 <= min <= max")


def generate_catalog(cfg: SynthConfig) -> list[ItemMeta]:
    """Deterministic catalog: h1 = category index + 1, h2 = h1 * 100."""
    catalog: list[ItemMeta] = []
    ide = 1
    for cat in range(cfg.n_categories):
        h1 = cat + 1
        for n in range(cfg.items_per_category):
            catalog.append(
                ItemMeta(
                    item_id=f"{100000 + cat * 1000 + n}",
                    ide=ide,
                    name=f"CAT{h1:02d} PRODUCT {n:03d}",
                    h1=h1,
                    h2=h1 * 100,
                )
            )
            ide += 1
    return catalog


def generate_baskets(catalog: list[ItemMeta], cfg: SynthConfig) -> list[Basket]:
    lo, hi = cfg.basket_size
    if cfg.intra_affinity > 0 and hi > cfg.items_per_category:
        raise ValueError(
            f"max basket size {hi} exceeds items_per_category {cfg.items_per_category}"
        )
    by_cat: dict[int, list[str]] = {}
    for meta in catalog:
        by_cat.setdefault(meta.h1, []).append(meta.item_id)
    all_ids = [m.item_id for m in catalog]
    rng = np.random.default_rng(cfg.seed)
    baskets: list[Basket] = []
    for b in range(cfg.n_baskets):
        size = int(rng.integers(lo, hi + 1))
        if rng.random() < cfg.intra_affinity:
            cat = int(rng.integers(1, cfg.n_categories + 1))
            pool = by_cat[cat]
        else:
            pool = all_ids
        size = min(size, len(pool))
        items = [pool[k] for k in rng.choice(len(pool), size=size, replace=False)]
        baskets.append(
            Basket(
                basket_id=f"B{b:07d}",
                items=items,
                timestamp=1_600_000_000.0 + 60.0 * b,
                site_id=f"S{int(rng.integers(1, 6))}",
                quantities=[int(q) for q in rng.integers(1, 4, size=len(items))],
            )
        )
    return baskets


def write_metadata(catalog: list[ItemMeta], path) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["ItemId", "IDE", "ItemName", "H1", "H2"])
    for m in catalog:
        writer.writerow([m.item_id, m.ide, m.name, m.h1, m.h2])
    atomic_write(path, buf.getvalue())


def write_transactions(baskets: list[Basket], path) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(
        ["BasketId", "ItemId", "SiteId", "TimeStamp", "Quantity", "CustomerId", "Available"]
    )
    for basket in baskets:
        for item, qty in zip(basket.items, basket.quantities):
            writer.writerow(
                [basket.basket_id, item, basket.site_id, f"{basket.timestamp:.0f}",
                 qty, f"C{basket.basket_id[1:]}", 1]
            )
    atomic_write(path, buf.getvalue())
