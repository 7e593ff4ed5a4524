import numpy as np
import pytest

from basketvec.ingest import (
    Basket,
    IngestError,
    IngestStats,
    build_vocabulary,
    load_metadata,
    stream_baskets,
)

META_HEADER = "ItemId,IDE,ItemName,H1,H2\n"
TX_HEADER = "BasketId,ItemId,SiteId,TimeStamp,Quantity,CustomerId,Available\n"


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text, encoding="utf-8")
    return p


def tx_row(bid, item, qty=1, ts=100):
    return f"{bid},{item},S1,{ts},{qty},C1,1\n"


class TestLoadMetadata:
    def test_basic_row(self, tmp_path):
        p = write(tmp_path, "m.csv", META_HEADER + "898234,2,GREETING CARDS,11,107\n")
        catalog = load_metadata(p)
        assert len(catalog) == 1
        m = catalog[0]
        assert (m.item_id, m.ide, m.name, m.h1, m.h2) == ("898234", 2, "GREETING CARDS", 11, 107)

    def test_comma_in_name(self, tmp_path):
        p = write(tmp_path, "m.csv", META_HEADER + "898234,2,GREETING CARDS, A 7331,11,107\n")
        assert load_metadata(p)[0].name == "GREETING CARDS, A 7331"

    def test_header_only(self, tmp_path):
        p = write(tmp_path, "m.csv", META_HEADER)
        assert load_metadata(p) == []

    def test_duplicate_item_id(self, tmp_path):
        p = write(tmp_path, "m.csv", META_HEADER + "898234,2,A,1,1\n898234,3,B,1,1\n")
        with pytest.raises(IngestError, match="duplicate"):
            load_metadata(p)

    def test_malformed_row_reports_line(self, tmp_path):
        p = write(tmp_path, "m.csv", META_HEADER + "1,2,OK,1,1\nX,notanint,B,1,1\n")
        with pytest.raises(IngestError, match=":3"):
            load_metadata(p)

    def test_missing_file(self, tmp_path):
        with pytest.raises(IngestError, match="not found"):
            load_metadata(tmp_path / "nope.csv")


@pytest.fixture
def catalog(tmp_path):
    rows = "".join(f"{i},{n},ITEM {i},1,1\n" for n, i in enumerate(["A", "B", "C"]))
    return load_metadata(write(tmp_path, "meta.csv", META_HEADER + rows))


class TestStreamBaskets:
    def test_grouping(self, tmp_path, catalog):
        p = write(tmp_path, "t.csv",
                  TX_HEADER + tx_row("B1", "A") + tx_row("B1", "B") + tx_row("B2", "A"))
        out = {b.basket_id: sorted(b.items) for b in stream_baskets(p, catalog)}
        assert out == {"B1": ["A", "B"], "B2": ["A"]}

    def test_unknown_item_dropped_and_counted(self, tmp_path, catalog):
        p = write(tmp_path, "t.csv", TX_HEADER + tx_row("B1", "A") + tx_row("B1", "X"))
        stats = IngestStats()
        baskets = list(stream_baskets(p, catalog, stats=stats))
        assert baskets[0].items == ["A"]
        assert stats.unknown_items_dropped == 1

    def test_duplicate_item_merged_quantities_summed(self, tmp_path, catalog):
        p = write(tmp_path, "t.csv",
                  TX_HEADER + tx_row("B1", "A", 1) + tx_row("B1", "A", 1) + tx_row("B1", "A", 2))
        baskets = list(stream_baskets(p, catalog))
        assert len(baskets) == 1
        assert baskets[0].items == ["A"]
        assert baskets[0].quantities == [4]

    def test_empty_basket_id_rejected(self, tmp_path, catalog):
        p = write(tmp_path, "t.csv", TX_HEADER + ",A,S1,100,1,C1,1\n")
        with pytest.raises(IngestError, match="empty BasketId"):
            list(stream_baskets(p, catalog))

    def test_missing_file(self, tmp_path, catalog):
        with pytest.raises(IngestError, match="not found"):
            list(stream_baskets(tmp_path / "nope.csv", catalog))

    def test_items_unique_per_basket(self, tmp_path, catalog):
        p = write(tmp_path, "t.csv",
                  TX_HEADER + tx_row("B1", "A") + tx_row("B1", "B") + tx_row("B1", "A"))
        for b in stream_baskets(p, catalog):
            assert len(b.items) == len(set(b.items))
            assert len(b.quantities) == len(b.items)


def mk_baskets(spec):
    return [Basket(basket_id=f"B{n}", items=items, timestamp=0, site_id="S",
                   quantities=[1] * len(items)) for n, items in enumerate(spec)]


class TestBuildVocabulary:
    def test_top_by_basket_count(self):
        baskets = mk_baskets([["A"]] * 5 + [["B"]] * 3 + [["C"]])
        vocab = build_vocabulary(baskets, 2)
        assert set(vocab.item_of) == {"A", "B"}

    def test_cap_larger_than_items(self):
        vocab = build_vocabulary(mk_baskets([["A", "B"]]), 10)
        assert set(vocab.item_of) == {"A", "B"}

    def test_tie_at_cut_lexicographic(self):
        baskets = mk_baskets([["A"]] * 5 + [["B"], ["C"]] * 3)
        vocab = build_vocabulary(baskets, 2)
        assert vocab.item_of == ["A", "B"]

    def test_bijection(self):
        vocab = build_vocabulary(mk_baskets([["A", "B", "C"], ["B", "C"]]), 3)
        for item in vocab.item_of:
            assert vocab.item_of[vocab.index_of[item]] == item

    def test_counts_distinct_baskets_not_units(self):
        baskets = mk_baskets([["A"], ["A"], ["B"]])
        baskets[2].quantities = [100]
        vocab = build_vocabulary(baskets, 1)
        assert vocab.item_of == ["A"]

    def test_empty_stream_rejected(self):
        with pytest.raises(IngestError, match="empty basket stream"):
            build_vocabulary([], 5)

    def test_deterministic(self):
        baskets = mk_baskets([["A", "B"], ["C", "A"], ["B"]])
        v1 = build_vocabulary(baskets, 3)
        v2 = build_vocabulary(baskets, 3)
        assert v1.item_of == v2.item_of
        assert v1.index_of == v2.index_of

    def test_sales_count_bound(self, fixture_data):
        vocab = fixture_data["vocab"]
        max_size = max(len(b.items) for b in fixture_data["baskets"])
        assert vocab.sales_count.sum() <= len(fixture_data["baskets"]) * max_size
