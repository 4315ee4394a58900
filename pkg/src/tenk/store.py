"""Embedded persistence for itemized filings, review tasks, and labels.

One sqlite file holds the item records (the key-value product), the filing
rows (raw bytes plus the reconstructed structure, so verdicts can
re-segment without refetching), and the review queue. Labeled samples from
expert verdicts go to an append-only JSONL file beside the database so the
training-data lineage stays auditable by eye.

All writes for one filing happen in a single transaction: readers never see
a half-written filing.
"""

from __future__ import annotations

import json
import sqlite3
import threading
import time
import uuid
from dataclasses import dataclass
from pathlib import Path

from .scorer import LabeledCandidate, Provenance
from .segmenter import ItemSegment, parse_key

_SCHEMA = """
CREATE TABLE IF NOT EXISTS items (
    key TEXT PRIMARY KEY,
    serial TEXT NOT NULL,
    value TEXT NOT NULL,
    stored_at REAL NOT NULL,
    pipeline_version TEXT NOT NULL
);
CREATE INDEX IF NOT EXISTS items_serial ON items (serial);
CREATE TABLE IF NOT EXISTS filings (
    serial TEXT PRIMARY KEY,
    pipeline_version TEXT NOT NULL,
    processed_at REAL NOT NULL,
    format TEXT NOT NULL,
    raw BLOB NOT NULL,
    structure_json TEXT NOT NULL,
    needs_review INTEGER NOT NULL
);
CREATE TABLE IF NOT EXISTS review_tasks (
    task_id TEXT PRIMARY KEY,
    serial TEXT NOT NULL,
    item TEXT NOT NULL,
    offset INTEGER NOT NULL,
    probability REAL NOT NULL,
    excerpt TEXT NOT NULL,
    highlight_start INTEGER NOT NULL,
    highlight_end INTEGER NOT NULL,
    features_json TEXT NOT NULL,
    status TEXT NOT NULL,
    created_at REAL NOT NULL,
    resolved_at REAL,
    reviewer TEXT,
    verdict TEXT
);
CREATE INDEX IF NOT EXISTS review_serial ON review_tasks (serial);
"""

STATUS_PENDING = "pending"
STATUS_ACCEPTED = "accepted"
STATUS_REJECTED = "rejected"


@dataclass(frozen=True)
class ItemRecord:
    key: str
    serial: str
    value: str
    stored_at: float
    pipeline_version: str


@dataclass(frozen=True)
class FilingRow:
    serial: str
    pipeline_version: str
    processed_at: float
    format: str
    raw: bytes
    structure: dict
    needs_review: bool


@dataclass(frozen=True)
class ReviewTask:
    task_id: str
    serial: str
    item: str
    offset: int
    probability: float
    excerpt: str
    highlight_start: int
    highlight_end: int
    features: tuple[float, ...]
    status: str
    created_at: float
    resolved_at: float | None = None
    reviewer: str | None = None
    verdict: str | None = None


class Store:
    """Sqlite-backed store; safe for concurrent reads, writes serialized.

    The public methods are the storage contract; anything matching them can
    replace this class (the service only talks through this surface).
    """

    def __init__(self, path: Path | str, clock=time.time):
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self.labels_path = self.path.with_suffix(".labels.jsonl")
        self._clock = clock
        self._write_lock = threading.Lock()
        self._conn = sqlite3.connect(self.path, check_same_thread=False)
        self._conn.execute("PRAGMA journal_mode=WAL")
        self._conn.executescript(_SCHEMA)
        self._conn.commit()

    def close(self) -> None:
        self._conn.close()

    # -- filings and item records -------------------------------------------

    def put_filing(
        self,
        serial: str,
        pipeline_version: str,
        format_name: str,
        raw: bytes,
        structure: dict,
        segments: list[ItemSegment],
        tasks: list[ReviewTask],
        needs_review: bool,
    ) -> None:
        """Persist one processed filing atomically, replacing any prior state."""
        now = self._clock()
        with self._write_lock, self._conn:
            self._conn.execute("DELETE FROM items WHERE serial = ?", (serial,))
            self._conn.execute(
                "DELETE FROM review_tasks WHERE serial = ? AND status = ?",
                (serial, STATUS_PENDING),
            )
            self._conn.execute("DELETE FROM filings WHERE serial = ?", (serial,))
            self._conn.execute(
                "INSERT INTO filings VALUES (?, ?, ?, ?, ?, ?, ?)",
                (
                    serial,
                    pipeline_version,
                    now,
                    format_name,
                    raw,
                    json.dumps(structure),
                    int(needs_review),
                ),
            )
            self._conn.executemany(
                "INSERT INTO items VALUES (?, ?, ?, ?, ?)",
                [(s.key, serial, s.text, now, pipeline_version) for s in segments],
            )
            self._conn.executemany(
                "INSERT INTO review_tasks "
                "(task_id, serial, item, offset, probability, excerpt, "
                " highlight_start, highlight_end, features_json, status, created_at) "
                "VALUES (?, ?, ?, ?, ?, ?, ?, ?, ?, ?, ?)",
                [
                    (
                        t.task_id,
                        t.serial,
                        t.item,
                        t.offset,
                        t.probability,
                        t.excerpt,
                        t.highlight_start,
                        t.highlight_end,
                        json.dumps(list(t.features)),
                        t.status,
                        now,
                    )
                    for t in tasks
                ],
            )

    def update_structure(
        self, serial: str, structure: dict, segments: list[ItemSegment], needs_review: bool
    ) -> None:
        """Overwrite a filing's structure and item records after a verdict."""
        now = self._clock()
        with self._write_lock, self._conn:
            self._conn.execute(
                "UPDATE filings SET structure_json = ?, needs_review = ? WHERE serial = ?",
                (json.dumps(structure), int(needs_review), serial),
            )
            self._conn.execute("DELETE FROM items WHERE serial = ?", (serial,))
            row = self._conn.execute(
                "SELECT pipeline_version FROM filings WHERE serial = ?", (serial,)
            ).fetchone()
            version = row[0] if row else ""
            self._conn.executemany(
                "INSERT INTO items VALUES (?, ?, ?, ?, ?)",
                [(s.key, serial, s.text, now, version) for s in segments],
            )

    def get_filing(self, serial: str) -> FilingRow | None:
        row = self._conn.execute(
            "SELECT serial, pipeline_version, processed_at, format, raw, "
            "structure_json, needs_review FROM filings WHERE serial = ?",
            (serial,),
        ).fetchone()
        if row is None:
            return None
        return FilingRow(
            serial=row[0],
            pipeline_version=row[1],
            processed_at=row[2],
            format=row[3],
            raw=row[4],
            structure=json.loads(row[5]),
            needs_review=bool(row[6]),
        )

    def get_item(self, key: str) -> ItemRecord | None:
        parse_key(key)  # MalformedRef on bad grammar, surfaced as 400 upstream
        row = self._conn.execute(
            "SELECT key, serial, value, stored_at, pipeline_version "
            "FROM items WHERE key = ?",
            (key,),
        ).fetchone()
        if row is None:
            return None
        return ItemRecord(*row)

    def keys_for(self, serial: str) -> list[str]:
        rows = self._conn.execute(
            "SELECT key FROM items WHERE serial = ?", (serial,)
        ).fetchall()
        return sorted(r[0] for r in rows)

    # -- review queue ---------------------------------------------------------

    def list_tasks(self, status: str | None = None, serial: str | None = None) -> list[ReviewTask]:
        query = (
            "SELECT task_id, serial, item, offset, probability, excerpt, "
            "highlight_start, highlight_end, features_json, status, created_at, "
            "resolved_at, reviewer, verdict FROM review_tasks"
        )
        clauses, params = [], []
        if status is not None:
            clauses.append("status = ?")
            params.append(status)
        if serial is not None:
            clauses.append("serial = ?")
            params.append(serial)
        if clauses:
            query += " WHERE " + " AND ".join(clauses)
        query += " ORDER BY created_at, task_id"
        return [self._task_from_row(r) for r in self._conn.execute(query, params)]

    def get_task(self, task_id: str) -> ReviewTask | None:
        row = self._conn.execute(
            "SELECT task_id, serial, item, offset, probability, excerpt, "
            "highlight_start, highlight_end, features_json, status, created_at, "
            "resolved_at, reviewer, verdict FROM review_tasks WHERE task_id = ?",
            (task_id,),
        ).fetchone()
        return self._task_from_row(row) if row else None

    def resolve_task(self, task_id: str, verdict: str, reviewer: str) -> ReviewTask | None:
        """Atomically move a pending task to its terminal status.

        Returns the resolved task, or None when it was already resolved (the
        caller turns that into a conflict). Resolved tasks never change again.
        """
        status = STATUS_ACCEPTED if verdict == "accept" else STATUS_REJECTED
        with self._write_lock, self._conn:
            cur = self._conn.execute(
                "UPDATE review_tasks SET status = ?, resolved_at = ?, reviewer = ?, "
                "verdict = ? WHERE task_id = ? AND status = ?",
                (status, self._clock(), reviewer, verdict, task_id, STATUS_PENDING),
            )
            if cur.rowcount == 0:
                return None
        return self.get_task(task_id)

    @staticmethod
    def _task_from_row(row) -> ReviewTask:
        return ReviewTask(
            task_id=row[0],
            serial=row[1],
            item=row[2],
            offset=row[3],
            probability=row[4],
            excerpt=row[5],
            highlight_start=row[6],
            highlight_end=row[7],
            features=tuple(json.loads(row[8])),
            status=row[9],
            created_at=row[10],
            resolved_at=row[11],
            reviewer=row[12],
            verdict=row[13],
        )

    # -- labeled samples ------------------------------------------------------

    def append_labeled_sample(
        self, task: ReviewTask, label: bool, reviewer: str
    ) -> LabeledCandidate:
        sample = LabeledCandidate(
            features=task.features, label=label, provenance=Provenance.EXPERT_REVIEW
        )
        record = {
            "timestamp": self._clock(),
            "reviewer": reviewer,
            "serial": task.serial,
            "item": task.item,
            "offset": task.offset,
            "label": label,
            "features": list(task.features),
            "provenance": sample.provenance.value,
        }
        with self._write_lock:
            with self.labels_path.open("a", encoding="utf-8") as fh:
                fh.write(json.dumps(record) + "\n")
        return sample

    def labeled_samples(self) -> list[LabeledCandidate]:
        if not self.labels_path.exists():
            return []
        samples = []
        for line in self.labels_path.read_text(encoding="utf-8").splitlines():
            if not line.strip():
                continue
            rec = json.loads(line)
            samples.append(
                LabeledCandidate(
                    features=tuple(rec["features"]),
                    label=bool(rec["label"]),
                    provenance=Provenance(rec.get("provenance", "expert_review")),
                )
            )
        return samples


def new_task_id() -> str:
    return uuid.uuid4().hex
