"""Persistence layer: filings, item records, review queue, label log."""

from __future__ import annotations

import threading

import pytest

from tenk.errors import MalformedRef
from tenk.schema import ItemId
from tenk.scorer import Provenance
from tenk.segmenter import ItemSegment, make_key
from tenk.store import (
    STATUS_ACCEPTED,
    STATUS_PENDING,
    STATUS_REJECTED,
    ReviewTask,
    Store,
    new_task_id,
)


class Clock:
    def __init__(self, start=1000.0):
        self.now = start

    def __call__(self):
        self.now += 1.0
        return self.now


def _segment(serial, label, text):
    item = ItemId(label)
    return ItemSegment(
        key=make_key(serial, item),
        serial=serial,
        item=item,
        start_offset=0,
        end_offset=len(text),
        text=text,
    )


def _task(serial, label="1", offset=40):
    return ReviewTask(
        task_id=new_task_id(),
        serial=serial,
        item=label,
        offset=offset,
        probability=0.31,
        excerpt="... Item 1. Business ...",
        highlight_start=4,
        highlight_end=20,
        features=(0.2,) * 12,
        status=STATUS_PENDING,
        created_at=0.0,
    )


@pytest.fixture
def store(tmp_path):
    s = Store(tmp_path / "tenk.db", clock=Clock())
    yield s
    s.close()


def _put(store, serial="S-1", tasks=(), needs_review=False, version="1.0.0"):
    segments = [_segment(serial, "1", "alpha"), _segment(serial, "2", "beta")]
    store.put_filing(
        serial=serial,
        pipeline_version=version,
        format_name="html",
        raw=b"<html>raw</html>",
        structure={"score": 1.5, "items": [{"item": "1"}, {"item": "2"}]},
        segments=segments,
        tasks=list(tasks),
        needs_review=needs_review,
    )
    return segments


def test_filing_round_trip(store):
    _put(store)
    row = store.get_filing("S-1")
    assert row is not None
    assert row.serial == "S-1"
    assert row.pipeline_version == "1.0.0"
    assert row.format == "html"
    assert row.raw == b"<html>raw</html>"
    assert row.structure["score"] == 1.5
    assert row.needs_review is False
    assert store.get_filing("missing") is None


def test_item_round_trip_and_keys(store):
    segments = _put(store)
    for seg in segments:
        rec = store.get_item(seg.key)
        assert rec is not None and rec.value == seg.text
        assert rec.serial == "S-1"
    assert store.keys_for("S-1") == sorted(s.key for s in segments)
    assert store.keys_for("nope") == []
    assert store.get_item("S-1#2#5") is None


def test_get_item_validates_key_grammar(store):
    with pytest.raises(MalformedRef):
        store.get_item("not a key")
    with pytest.raises(MalformedRef):
        store.get_item("S-1#9#1")


def test_reput_replaces_items_and_pending_tasks(store):
    _put(store, tasks=[_task("S-1")])
    assert len(store.list_tasks(status=STATUS_PENDING)) == 1
    store.put_filing(
        serial="S-1",
        pipeline_version="1.0.1",
        format_name="html",
        raw=b"new",
        structure={},
        segments=[_segment("S-1", "3", "gamma")],
        tasks=[],
        needs_review=False,
    )
    assert store.keys_for("S-1") == [make_key("S-1", ItemId("3"))]
    assert store.list_tasks(status=STATUS_PENDING) == []
    assert store.get_filing("S-1").pipeline_version == "1.0.1"


def test_reput_keeps_resolved_tasks_for_audit(store):
    task = _task("S-1")
    _put(store, tasks=[task])
    store.resolve_task(task.task_id, "accept", "alice")
    _put(store)  # reprocess same serial
    kept = store.get_task(task.task_id)
    assert kept is not None and kept.status == STATUS_ACCEPTED


def test_update_structure_rewrites_items(store):
    _put(store)
    store.update_structure(
        "S-1",
        {"score": 9.9},
        [_segment("S-1", "1", "only remaining")],
        needs_review=False,
    )
    row = store.get_filing("S-1")
    assert row.structure == {"score": 9.9}
    assert store.keys_for("S-1") == [make_key("S-1", ItemId("1"))]
    # the raw bytes and version survive a structure rewrite
    assert row.raw == b"<html>raw</html>"
    assert row.pipeline_version == "1.0.0"


def test_task_lifecycle(store):
    task = _task("S-1")
    _put(store, tasks=[task], needs_review=True)
    fetched = store.get_task(task.task_id)
    assert fetched.status == STATUS_PENDING
    assert fetched.features == (0.2,) * 12
    resolved = store.resolve_task(task.task_id, "reject", "bob")
    assert resolved.status == STATUS_REJECTED
    assert resolved.verdict == "reject"
    assert resolved.reviewer == "bob"
    assert resolved.resolved_at is not None


def test_second_resolution_returns_none(store):
    task = _task("S-1")
    _put(store, tasks=[task])
    assert store.resolve_task(task.task_id, "accept", "a") is not None
    assert store.resolve_task(task.task_id, "reject", "b") is None
    # the first verdict stands
    assert store.get_task(task.task_id).status == STATUS_ACCEPTED


def test_resolve_unknown_task_returns_none(store):
    assert store.resolve_task("no-such-task", "accept", "a") is None


def test_concurrent_resolution_single_winner(store):
    task = _task("S-1")
    _put(store, tasks=[task])
    wins = []
    barrier = threading.Barrier(8)

    def attempt(i):
        barrier.wait()
        if store.resolve_task(task.task_id, "accept", f"r{i}") is not None:
            wins.append(i)

    threads = [threading.Thread(target=attempt, args=(i,)) for i in range(8)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert len(wins) == 1


def test_list_tasks_filters(store):
    t1, t2 = _task("S-1"), _task("S-2", label="7A")
    _put(store, tasks=[t1])
    _put(store, serial="S-2", tasks=[t2])
    store.resolve_task(t2.task_id, "accept", "a")
    assert {t.task_id for t in store.list_tasks(serial="S-1")} == {t1.task_id}
    assert {t.task_id for t in store.list_tasks(status=STATUS_PENDING)} == {t1.task_id}
    assert {t.task_id for t in store.list_tasks(status=STATUS_ACCEPTED)} == {t2.task_id}
    assert len(store.list_tasks()) == 2


def test_labels_append_only_jsonl(store, tmp_path):
    task = _task("S-1")
    _put(store, tasks=[task])
    sample = store.append_labeled_sample(task, label=True, reviewer="alice")
    store.append_labeled_sample(task, label=False, reviewer="bob")
    assert sample.provenance is Provenance.EXPERT_REVIEW
    assert sample.features == task.features
    loaded = store.labeled_samples()
    assert [s.label for s in loaded] == [True, False]
    assert all(s.provenance is Provenance.EXPERT_REVIEW for s in loaded)
    lines = store.labels_path.read_text().strip().splitlines()
    assert len(lines) == 2


def test_no_labels_file_means_no_samples(store):
    assert store.labeled_samples() == []


def test_clock_injection_orders_rows(tmp_path):
    clock = Clock(5000.0)
    store = Store(tmp_path / "c.db", clock=clock)
    try:
        _put(store, serial="A")
        _put(store, serial="B")
        a = store.get_filing("A").processed_at
        b = store.get_filing("B").processed_at
        assert 5000.0 < a < b
    finally:
        store.close()


def test_reopen_sees_persisted_state(tmp_path):
    path = tmp_path / "p.db"
    store = Store(path)
    _put(store, serial="S-9")
    store.close()
    again = Store(path)
    try:
        assert again.get_filing("S-9") is not None
        assert len(again.keys_for("S-9")) == 2
    finally:
        again.close()
