from __future__ import annotations

import csv
import io
import json

import pytest

from snappattern.fixture import (
    FixturePipeline,
    StageError,
    aggregate_records,
    anonymize_records,
    apply_stage,
    filter_records,
    format_records,
    sample_records,
)
from snappattern.httpkit import Headers, HttpRequest, UpstreamClient

# sha256 digests computed with `printf '<value>' | sha256sum` beforehand
BRECHT_SHA256 = "3e6740a808e74a6ae7c199470bdc44ccd4f1856d4e4d30a029d6508f94bb529b"
REMARQUE_SHA256 = "7918d4b808597dcffc0ecdbdc8ae3629dbea36db2b19b41d05ba7eedf6429b16"


class TestSample:
    def test_bundled_sample_has_100_records(self):
        assert len(sample_records()) == 100

    def test_records_have_the_documented_shape(self):
        for record in sample_records():
            assert set(record) == {"title", "author", "year", "publisher"}
            assert record["title"] and record["author"]


class TestFilter:
    def test_year_filter_matches_brute_force_scan(self):
        records = sample_records()
        got = filter_records(records, "year", 1933)
        expected = [r for r in records if r["year"] == 1933]
        assert got == expected
        assert len(got) > 0
        assert all(r["year"] == 1933 for r in got)

    def test_year_value_accepted_as_string(self):
        records = sample_records()
        assert filter_records(records, "year", "1933") == \
            filter_records(records, "year", 1933)

    def test_no_match_gives_empty_list(self):
        assert filter_records(sample_records(), "author", "Nobody") == []

    def test_unknown_field_rejected(self):
        with pytest.raises(StageError, match="unknown field"):
            filter_records(sample_records(), "isbn", "x")


class TestAggregate:
    def test_small_example(self):
        records = [{"author": "A"}, {"author": "A"}, {"author": "B"}]
        assert aggregate_records(records, "author") == [["A", 2], ["B", 1]]

    def test_empty_input(self):
        assert aggregate_records([], "author") == []

    def test_counts_sum_to_record_count(self):
        records = sample_records()
        pairs = aggregate_records(records, "publisher")
        assert sum(count for _key, count in pairs) == len(records)

    def test_keys_sorted_ascending(self):
        pairs = aggregate_records(sample_records(), "year")
        keys = [k for k, _ in pairs]
        assert keys == sorted(keys)


class TestAnonymize:
    def test_mask_keeps_first_character(self):
        records = [{"title": "t", "author": "Brecht", "year": 1928, "publisher": "p"}]
        out = anonymize_records(records, "mask", ["author"])
        assert out[0]["author"] == "B*****"

    def test_mask_of_empty_string(self):
        records = [{"title": "t", "author": "", "year": 1, "publisher": "p"}]
        assert anonymize_records(records, "mask", ["author"])[0]["author"] == ""

    def test_hash_matches_external_reference_digest(self):
        records = [{"title": "t", "author": "Brecht", "year": 1, "publisher": "p"},
                   {"title": "t", "author": "Erich Maria Remarque", "year": 1, "publisher": "p"}]
        out = anonymize_records(records, "hash", ["author"])
        assert out[0]["author"] == BRECHT_SHA256
        assert out[1]["author"] == REMARQUE_SHA256
        assert all(len(r["author"]) == 64 for r in out)

    def test_original_records_untouched(self):
        records = [{"title": "t", "author": "Brecht", "year": 1, "publisher": "p"}]
        anonymize_records(records, "mask", ["author"])
        assert records[0]["author"] == "Brecht"

    def test_unknown_strategy_rejected(self):
        with pytest.raises(StageError, match="unknown strategy"):
            anonymize_records([], "rot13", ["author"])


class TestFormat:
    def test_csv_of_two_records_has_three_lines(self):
        records = sample_records()[:2]
        text = format_records(records, "csv")
        assert len(text.splitlines()) == 3

    def test_json_round_trips(self):
        records = sample_records()[:5]
        assert json.loads(format_records(records, "json")) == records

    def test_comma_in_value_quoted(self):
        records = [{"title": "One, Two", "author": "A", "year": 1, "publisher": "P"}]
        text = format_records(records, "csv")
        rows = list(csv.reader(io.StringIO(text)))
        assert rows[1][0] == "One, Two"
        assert '"One, Two"' in text

    def test_unknown_format_rejected(self):
        with pytest.raises(StageError, match="unknown output"):
            format_records([], "xml")


def post_json(url: str, path: str, payload) -> tuple[int, bytes]:
    client = UpstreamClient(url)
    response = client(HttpRequest(
        method="POST", path=path,
        headers=Headers({"content-type": "application/json"}),
        body=json.dumps(payload).encode()))
    return response.status, response.body


@pytest.fixture(scope="module")
def pipeline():
    with FixturePipeline() as p:
        p.start_coordinator()
        yield p


class TestHttpPipeline:
    def test_data_product_serves_full_stable_list(self, pipeline):
        client = UpstreamClient(pipeline.data_product.url)
        first = client(HttpRequest(method="GET", path="/data"))
        second = client(HttpRequest(method="GET", path="/data"))
        assert first.status == 200
        assert first.headers["content-type"] == "application/json"
        assert first.body == second.body
        assert len(json.loads(first.body)) == 100

    def test_stage_http_equals_pure_function(self, pipeline):
        records = sample_records()
        status, body = post_json(pipeline.stage_urls["filter"], "/filter",
                                 {"records": records,
                                  "params": {"field": "year", "value": 1933}})
        assert status == 200
        assert json.loads(body)["records"] == filter_records(records, "year", 1933)

    def test_stage_errors_are_400(self, pipeline):
        status, body = post_json(pipeline.stage_urls["filter"], "/filter",
                                 {"records": [], "params": {"field": "isbn", "value": 1}})
        assert status == 400
        assert "unknown field" in json.loads(body)["error"]

    @pytest.mark.parametrize("chain", [
        [],
        [{"stage": "filter", "params": {"field": "year", "value": 1933}}],
        [{"stage": "filter", "params": {"field": "year", "value": 1933}},
         {"stage": "format", "params": {"output": "json"}}],
        [{"stage": "anonymize", "params": {"strategy": "hash", "fields": ["author"]}},
         {"stage": "aggregate", "params": {"field": "author"}}],
        [{"stage": "aggregate", "params": {"field": "publisher"}},
         {"stage": "format", "params": {"output": "csv"}}],
    ])
    def test_coordinator_equals_pure_composition(self, pipeline, chain):
        client = UpstreamClient(pipeline.coordinator.url)
        response = client(HttpRequest(
            method="POST", path="/pipeline",
            headers=Headers({"content-type": "application/json"}),
            body=json.dumps(chain).encode()))
        assert response.status == 200

        records: list | str = sample_records()
        final_document = None
        for step in chain:
            result, kind = apply_stage(step["stage"], records, step.get("params", {}))
            if kind == "document":
                final_document = result
                break
            records = result
        if final_document is not None:
            assert response.body.decode() == final_document
        else:
            assert json.loads(response.body) == records

    def test_coordinator_names_failing_stage(self, pipeline):
        chain = [{"stage": "filter", "params": {"field": "isbn", "value": "x"}}]
        client = UpstreamClient(pipeline.coordinator.url)
        response = client(HttpRequest(
            method="POST", path="/pipeline",
            headers=Headers({"content-type": "application/json"}),
            body=json.dumps(chain).encode()))
        assert response.status == 502
        assert json.loads(response.body)["stage"] == "filter"

    def test_unknown_stage_rejected_up_front(self, pipeline):
        client = UpstreamClient(pipeline.coordinator.url)
        response = client(HttpRequest(
            method="POST", path="/pipeline",
            headers=Headers({"content-type": "application/json"}),
            body=json.dumps([{"stage": "compress"}]).encode()))
        assert response.status == 400
