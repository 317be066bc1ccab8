from __future__ import annotations

import json

import pytest

from storymap.corpus import (filter_top_sources, load_corpus, parse_timestamp,
                             repair_text, select_endpoints)
from storymap.errors import InputError

CSV_HEADER = "id,timestamp,headline,source,url\n"


def write_csv(tmp_path, rows, name="corpus.csv"):
    path = tmp_path / name
    path.write_text(CSV_HEADER + "".join(rows), encoding="utf-8")
    return path


def test_load_csv_sorts_chronologically(tmp_path):
    path = write_csv(tmp_path, [
        "b,2020-01-03,third headline,src,\n",
        "a,2020-01-01,first headline,src,\n",
        "c,2020-01-02T08:30:00Z,second headline,src,http://x\n",
    ])
    corpus = load_corpus(path, "csv")
    assert corpus.ids() == ["a", "c", "b"]
    assert corpus.events[1].url == "http://x"
    assert corpus.events[0].timestamp.isoformat() == "2020-01-01T00:00:00+00:00"


def test_duplicate_id_rejected(tmp_path):
    path = write_csv(tmp_path, [
        "a,2020-01-01,first,src,\n",
        "a,2020-01-02,second,src,\n",
    ])
    with pytest.raises(InputError, match="'a'"):
        load_corpus(path, "csv")


def test_single_event_corpus_rejected(tmp_path):
    path = write_csv(tmp_path, ["a,2020-01-01,only one,src,\n"])
    with pytest.raises(InputError, match="at least 2"):
        load_corpus(path, "csv")


def test_bad_timestamp_reported(tmp_path):
    path = write_csv(tmp_path, [
        "a,2020-01-01,fine,src,\n",
        "b,not-a-date,broken,src,\n",
    ])
    with pytest.raises(InputError, match="not-a-date"):
        load_corpus(path, "csv")


def test_json_roundtrip(tmp_path):
    path = tmp_path / "corpus.json"
    path.write_text(json.dumps([
        {"id": "a", "timestamp": "2020-01-01", "headline": "one", "source": "s"},
        {"id": "b", "timestamp": "2020-01-02", "headline": "two", "source": "s"},
    ]), encoding="utf-8")
    corpus = load_corpus(path, "json")
    assert corpus.ids() == ["a", "b"]


def test_json_parse_error_names_line(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text('[{"id": "a",}]', encoding="utf-8")
    with pytest.raises(InputError, match="line"):
        load_corpus(path, "json")


def test_mojibake_repair():
    assert repair_text("Wuhan virus â€” what we know") == "Wuhan virus — what we know"
    assert repair_text("CafÃ© reopens") == "Café reopens"
    assert repair_text("plain   text \n here") == "plain text here"


def test_equal_timestamps_ordered_by_id(tmp_path):
    path = write_csv(tmp_path, [
        "z,2020-01-01,late id,src,\n",
        "a,2020-01-01,early id,src,\n",
    ])
    corpus = load_corpus(path, "csv")
    assert corpus.ids() == ["a", "z"]


def test_timestamp_parsing_variants():
    assert parse_timestamp("2020-02-03").hour == 0
    assert parse_timestamp("2020-02-03T10:11:12Z").utcoffset().total_seconds() == 0
    assert parse_timestamp("2020-02-03T10:11:12+02:00").hour == 8
    assert parse_timestamp("2020-02-03 10:11:12.654321").microsecond == 0
    with pytest.raises(InputError):
        parse_timestamp("03/02/2020")


def test_filter_top_sources(small_corpus):
    # sources cycle through six names; restrict to a two-source corpus
    from tests.conftest import make_corpus
    corpus = make_corpus(
        ["a one", "a two", "a three", "b one", "b two", "c lone"],
        sources=("alpha", "alpha", "alpha", "beta", "beta", "gamma"))
    top = filter_top_sources(corpus, 2)
    assert {e.source for e in top} == {"alpha", "beta"}
    assert [e.id for e in top] == [e.id for e in corpus if e.source != "gamma"]
    again = filter_top_sources(top, 2)
    assert again.ids() == top.ids()  # idempotent


def test_filter_top_sources_tie_breaks_lexicographically():
    from tests.conftest import make_corpus
    corpus = make_corpus(
        ["a one", "a two", "b one", "b two", "c one", "c two"],
        sources=("zeta", "zeta", "beta", "beta", "alpha", "alpha"))
    top = filter_top_sources(corpus, 2)
    assert {e.source for e in top} == {"alpha", "beta"}


def test_filter_identity_when_n_large(small_corpus):
    assert filter_top_sources(small_corpus, 99).ids() == small_corpus.ids()


def test_select_endpoints_defaults(small_corpus):
    start, end = select_endpoints(small_corpus)
    assert start.id == small_corpus.events[0].id
    assert end.id == small_corpus.events[-1].id


def test_select_endpoints_explicit(small_corpus):
    ids = small_corpus.ids()
    start, end = select_endpoints(small_corpus, ids[1], ids[4])
    assert (start.id, end.id) == (ids[1], ids[4])


def test_select_endpoints_out_of_order(small_corpus):
    ids = small_corpus.ids()
    with pytest.raises(InputError, match="precede"):
        select_endpoints(small_corpus, ids[4], ids[1])
    with pytest.raises(InputError, match="unknown"):
        select_endpoints(small_corpus, "missing", None)
