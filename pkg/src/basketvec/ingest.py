"""Parsing of item metadata and transaction logs into baskets and a capped vocabulary.

File formats (comma separated, UTF-8, one header row):

* metadata:     ItemId,IDE,ItemName,H1,H2
* transactions: BasketId,ItemId,SiteId,TimeStamp,Quantity,CustomerId,Available

Item names may contain unquoted commas; the metadata parser treats the first
two and last two fields as fixed and joins whatever sits in between.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator

import numpy as np

METADATA_COLUMNS = ["ItemId", "IDE", "ItemName", "H1", "H2"]
TRANSACTION_COLUMNS = [
    "BasketId", "ItemId", "SiteId", "TimeStamp", "Quantity", "CustomerId", "Available",
]


class IngestError(ValueError):
    """Raised on malformed or inconsistent input files."""


@dataclass(frozen=True)
class ItemMeta:
    item_id: str
    ide: int
    name: str
    h1: int
    h2: int


@dataclass
class Basket:
    basket_id: str
    items: list[str]
    timestamp: float
    site_id: str
    quantities: list[int]


@dataclass
class IngestStats:
    """Counters filled in while streaming a transactions file."""

    rows_read: int = 0
    baskets_emitted: int = 0
    unknown_items_dropped: int = 0


@dataclass
class Vocabulary:
    """Dense-index mapping over the retained top-sold items."""

    index_of: dict[str, int]
    item_of: list[str]
    sales_count: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))

    def __post_init__(self):
        if len(self.sales_count) == 0 and len(self.item_of) > 0:
            self.sales_count = np.zeros(len(self.item_of), dtype=np.int64)

    def __len__(self) -> int:
        return len(self.item_of)

    def __contains__(self, item_id: str) -> bool:
        return item_id in self.index_of


def load_metadata(path: str | Path) -> list[ItemMeta]:
    """Read a metadata file into a catalog, rejecting duplicate item ids."""
    path = Path(path)
    if not path.exists():
        raise IngestError(f"metadata file not found: {path}")
    catalog: list[ItemMeta] = []
    seen: set[str] = set()
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            next(reader)  # header
        except StopIteration:
            raise IngestError(f"{path}: empty file, header row required")
        for lineno, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) < 5:
                raise IngestError(f"{path}:{lineno}: expected 5 fields, got {len(row)}")
            # Unquoted commas inside ItemName land as extra fields in the middle.
            item_id = row[0].strip()
            try:
                ide = int(row[1])
                name = ",".join(row[2:-2]).strip()
                h1 = int(row[-2])
                h2 = int(row[-1])
            except ValueError as exc:
                raise IngestError(f"{path}:{lineno}: malformed row: {exc}") from exc
            if not item_id:
                raise IngestError(f"{path}:{lineno}: empty ItemId")
            if h1 < 0 or h2 < 0:
                raise IngestError(f"{path}:{lineno}: negative category id")
            if item_id in seen:
                raise IngestError(f"{path}:{lineno}: duplicate item_id {item_id!r}")
            seen.add(item_id)
            catalog.append(ItemMeta(item_id=item_id, ide=ide, name=name, h1=h1, h2=h2))
    return catalog


def stream_baskets(
    path: str | Path,
    catalog: Iterable[ItemMeta],
    stats: IngestStats | None = None,
) -> Iterator[Basket]:
    """Stream baskets from a transactions file, grouping contiguous BasketId runs.

    Rows of one basket must be contiguous (sorted or exported grouped); memory
    stays constant apart from the rows of the basket being assembled. Items not
    present in the catalog are dropped and counted in ``stats``. Duplicate item
    lines within a basket are merged with quantities summed.
    """
    path = Path(path)
    if not path.exists():
        raise IngestError(f"transactions file not found: {path}")
    known = {m.item_id for m in catalog}
    if stats is None:
        stats = IngestStats()

    def flush(bid, qty, ts, site) -> Basket:
        items = list(qty.keys())
        return Basket(
            basket_id=bid,
            items=items,
            timestamp=ts,
            site_id=site,
            quantities=[qty[i] for i in items],
        )

    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            next(reader)
        except StopIteration:
            raise IngestError(f"{path}: empty file, header row required")
        cur_id: str | None = None
        cur_qty: dict[str, int] = {}
        cur_ts = 0.0
        cur_site = ""
        for lineno, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) < 7:
                raise IngestError(f"{path}:{lineno}: expected 7 fields, got {len(row)}")
            stats.rows_read += 1
            bid = row[0].strip()
            if not bid:
                raise IngestError(f"{path}:{lineno}: empty BasketId")
            if bid != cur_id:
                if cur_id is not None and cur_qty:
                    stats.baskets_emitted += 1
                    yield flush(cur_id, cur_qty, cur_ts, cur_site)
                cur_id = bid
                cur_qty = {}
                try:
                    cur_ts = float(row[3])
                except ValueError as exc:
                    raise IngestError(f"{path}:{lineno}: bad TimeStamp: {exc}") from exc
                cur_site = row[2].strip()
            item = row[1].strip()
            try:
                qty = int(row[4])
            except ValueError as exc:
                raise IngestError(f"{path}:{lineno}: bad Quantity: {exc}") from exc
            if item not in known:
                stats.unknown_items_dropped += 1
                continue
            cur_qty[item] = cur_qty.get(item, 0) + qty
        if cur_id is not None and cur_qty:
            stats.baskets_emitted += 1
            yield flush(cur_id, cur_qty, cur_ts, cur_site)


def build_vocabulary(baskets: Iterable[Basket], cap: int) -> Vocabulary:
    """Retain the ``cap`` items appearing in the most distinct baskets.

    Ties at the cut keep the lexicographically smaller item_id. Index order is
    descending sales count, then ascending item_id, so repeated runs over the
    same stream assign identical indices.
    """
    if cap < 1:
        raise ValueError(f"cap must be >= 1, got {cap}")
    counts: dict[str, int] = {}
    n_baskets = 0
    for basket in baskets:
        n_baskets += 1
        for item in set(basket.items):
            counts[item] = counts.get(item, 0) + 1
    if n_baskets == 0 or not counts:
        raise IngestError("empty basket stream: nothing to build a vocabulary from")
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))[:cap]
    item_of = [item for item, _ in ranked]
    return Vocabulary(
        index_of={item: idx for idx, item in enumerate(item_of)},
        item_of=item_of,
        sales_count=np.array([c for _, c in ranked], dtype=np.int64),
    )
