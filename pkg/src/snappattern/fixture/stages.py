"""Pure transformation stages over the bundled book records.

These are the desk-scale stand-ins for the pipeline's transformation
services: filter, aggregate, anonymize (mask or hash), format (CSV or
JSON). Each is a pure function so HTTP behavior can be checked against
in-process composition.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
from functools import lru_cache
from importlib import resources

RECORD_FIELDS = ("title", "author", "year", "publisher")


class StageError(ValueError):
    """Invalid stage parameters (unknown field, strategy, or format)."""


@lru_cache(maxsize=1)
def load_sample() -> tuple[dict, ...]:
    text = (resources.files(__package__) / "data/banned_books.json").read_text("utf-8")
    return tuple(json.loads(text))


def sample_records() -> list[dict]:
    return [dict(r) for r in load_sample()]


def filter_records(records: list[dict], field: str, value) -> list[dict]:
    """Keep records whose field equals value; year compares as integer."""
    if field not in RECORD_FIELDS:
        raise StageError(f"unknown field {field!r}")
    if field == "year":
        try:
            wanted = int(value)
        except (TypeError, ValueError) as exc:
            raise StageError(f"year filter needs an integer, got {value!r}") from exc
        return [r for r in records if int(r.get(field, 0)) == wanted]
    wanted = str(value)
    return [r for r in records if str(r.get(field, "")) == wanted]


def aggregate_records(records: list[dict], group_by: str) -> list[list]:
    """Count per distinct value of group_by, sorted ascending by key."""
    if group_by not in RECORD_FIELDS:
        raise StageError(f"unknown field {group_by!r}")
    counts: dict = {}
    for record in records:
        key = record.get(group_by)
        counts[key] = counts.get(key, 0) + 1
    try:
        ordered = sorted(counts)
    except TypeError:  # mixed key types; order by text form
        ordered = sorted(counts, key=str)
    return [[key, counts[key]] for key in ordered]


def _mask(value: str) -> str:
    if not value:
        return ""
    return value[0] + "*" * (len(value) - 1)


def _hash(value: str) -> str:
    return hashlib.sha256(value.encode("utf-8")).hexdigest()


def anonymize_records(records: list[dict], strategy: str,
                      fields: list[str]) -> list[dict]:
    """Mask keeps the first character; hash replaces the value entirely."""
    if strategy not in ("mask", "hash"):
        raise StageError(f"unknown strategy {strategy!r}")
    for field in fields:
        if field not in RECORD_FIELDS:
            raise StageError(f"unknown field {field!r}")
    transform = _mask if strategy == "mask" else _hash
    out = []
    for record in records:
        clone = dict(record)
        for field in fields:
            if field in clone:
                clone[field] = transform(str(clone[field]))
        out.append(clone)
    return out


def format_records(records: list, output: str) -> str:
    """Render records as a CSV or JSON document."""
    if output == "json":
        return json.dumps(records, ensure_ascii=False)
    if output != "csv":
        raise StageError(f"unknown output format {output!r}")
    if not records:
        return ""
    buffer = io.StringIO(newline="")
    writer = csv.writer(buffer)
    if isinstance(records[0], dict):
        known = [f for f in RECORD_FIELDS if f in records[0]]
        extra = [k for k in records[0] if k not in RECORD_FIELDS]
        header = known + extra
        writer.writerow(header)
        for record in records:
            writer.writerow([record.get(k, "") for k in header])
    else:  # aggregate output: [key, count] pairs
        writer.writerow(["key", "count"])
        for key, count in records:
            writer.writerow([key, count])
    return buffer.getvalue()
