"""Persistent run and injection records: directory-per-run plus JSONL index.

Every state change appends one line; reloading replays the lines with the
last record per id winning, so the registry survives process restarts.
"""

from __future__ import annotations

import json
import threading
from dataclasses import asdict, dataclass, field
from pathlib import Path


@dataclass
class RunRecord:
    run_id: str
    pattern: str  # active pattern name or "baseline"
    workload: dict  # profile parameters: name, step_users, duration_s, targets, ...
    status: str = "created"  # created | running | done | failed
    started_at: float | None = None  # unix seconds
    ended_at: float | None = None
    artifact_paths: dict = field(default_factory=dict)
    error: str | None = None


@dataclass
class InjectionRecord:
    injection_id: str
    manifest_set_id: str
    selection: dict  # serialized PatternSelection
    status: str = "applied"  # applied | removed
    ready: bool = True


class _JsonlRegistry:
    def __init__(self, index_path: Path, record_cls, id_field: str):
        self._path = index_path
        self._cls = record_cls
        self._id_field = id_field
        self._lock = threading.Lock()
        self._records: dict = {}
        self._load()

    def _load(self) -> None:
        if not self._path.exists():
            return
        with open(self._path, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                data = json.loads(line)
                record = self._cls(**data)
                self._records[getattr(record, self._id_field)] = record

    def upsert(self, record) -> None:
        with self._lock:
            self._records[getattr(record, self._id_field)] = record
            self._path.parent.mkdir(parents=True, exist_ok=True)
            with open(self._path, "a", encoding="utf-8") as fh:
                fh.write(json.dumps(asdict(record), sort_keys=True) + "\n")

    def get(self, record_id: str):
        with self._lock:
            return self._records.get(record_id)

    def list(self) -> list:
        with self._lock:
            return list(self._records.values())


class RunRegistry(_JsonlRegistry):
    def __init__(self, data_dir: Path):
        self._data_dir = Path(data_dir)
        super().__init__(self._data_dir / "runs" / "index.jsonl", RunRecord, "run_id")

    def run_dir(self, run_id: str) -> Path:
        path = self._data_dir / "runs" / run_id
        path.mkdir(parents=True, exist_ok=True)
        return path


class InjectionRegistry(_JsonlRegistry):
    def __init__(self, data_dir: Path):
        super().__init__(Path(data_dir) / "injections.jsonl", InjectionRecord,
                         "injection_id")

    def active(self) -> list[InjectionRecord]:
        return [r for r in self.list() if r.status == "applied"]
