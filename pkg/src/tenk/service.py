"""HTTP service around the itemization pipeline.

Cache-or-process semantics: the first request for a filing runs the full
pipeline and persists every item record; later requests, including ones
racing the first, are answered from the store. Low-confidence boundaries
open review tasks, and expert verdicts patch the stored structure and
accumulate as labeled training examples.
"""

from __future__ import annotations

import os
import statistics
import threading
import time
from collections import deque
from contextlib import asynccontextmanager
from dataclasses import dataclass
from pathlib import Path
from typing import Literal

import yaml
from fastapi import Depends, FastAPI, HTTPException, Request, Response
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from .dictionary import KeywordDictionary, default_dictionary, load_dictionary
from .docmodel import parse_filing
from .errors import (
    ConfigError,
    MalformedRef,
    NetworkError,
    ParseError,
    TenkError,
    UnknownSerial,
    UnknownTask,
    VerdictConflict,
)
from .features import extract_features
from .ingest import (
    DEFAULT_RATE_LIMIT,
    FilingFetcher,
    FilingRef,
    RawFiling,
    serial_from_ref,
)
from .pipeline import (
    PIPELINE_VERSION,
    ItemizedFiling,
    detect_fiscal_year,
    run_pipeline,
    train_default_scorer,
)
from .reconstructor import (
    DEFAULT_SKIP_PENALTY,
    Assignment,
    StructureHypothesis,
    log_odds,
    skip_penalties,
)
from .schema import ALL_ITEMS, ItemId
from .scorer import CandidateScorer
from .segmenter import parse_key, segment
from .store import (
    STATUS_ACCEPTED,
    STATUS_PENDING,
    STATUS_REJECTED,
    FilingRow,
    ReviewTask,
    Store,
    new_task_id,
)

EXCERPT_RADIUS_CHARS = 1500
LATENCY_WINDOW = 2048

_ENV_PREFIX = "TENK_"


@dataclass(frozen=True)
class ServiceConfig:
    """Everything the service needs to run; file values lose to env overrides."""

    store_path: Path = Path("tenk-data/store.db")
    cache_dir: Path = Path("tenk-data/cache")
    model_path: Path | None = None
    dictionary_path: Path | None = None
    threshold: float = 0.5
    skip_penalty: float = DEFAULT_SKIP_PENALTY
    worker_limit: int = 4
    api_token: str | None = None
    user_agent: str | None = None
    rate_limit: float = DEFAULT_RATE_LIMIT
    static_dir: Path | None = None
    samples_dir: Path | None = None
    allowed_origins: tuple[str, ...] = ("*",)
    host: str = "127.0.0.1"
    port: int = 8000

    def __post_init__(self):
        if not 0.0 < self.threshold < 1.0:
            raise ConfigError(f"threshold must lie in (0, 1), got {self.threshold}")
        if self.skip_penalty < 0.0:
            raise ConfigError("skip_penalty must be non-negative")
        if self.worker_limit < 1:
            raise ConfigError("worker_limit must be at least 1")


_CONFIG_PATHS = {
    "store_path",
    "cache_dir",
    "model_path",
    "dictionary_path",
    "static_dir",
    "samples_dir",
}
_CONFIG_FLOATS = {"threshold", "skip_penalty", "rate_limit"}
_CONFIG_INTS = {"worker_limit", "port"}


def _coerce(key: str, value):
    if value is None:
        return None
    if key in _CONFIG_PATHS:
        return Path(value)
    if key in _CONFIG_FLOATS:
        return float(value)
    if key in _CONFIG_INTS:
        return int(value)
    if key == "allowed_origins":
        if isinstance(value, str):
            value = [v.strip() for v in value.split(",") if v.strip()]
        return tuple(value)
    return value


def load_config(path: Path | str | None = None, env: dict | None = None) -> ServiceConfig:
    """Build a config from an optional YAML file plus TENK_* env overrides."""
    values: dict = {}
    if path is not None:
        try:
            data = yaml.safe_load(Path(path).read_text(encoding="utf-8")) or {}
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        except yaml.YAMLError as exc:
            raise ConfigError(f"unparseable config {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config file must be a mapping")
        values.update(data)
    env = os.environ if env is None else env
    for key in ServiceConfig.__dataclass_fields__:
        env_key = _ENV_PREFIX + key.upper()
        if env_key in env:
            values[key] = env[env_key]
    unknown = set(values) - set(ServiceConfig.__dataclass_fields__)
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    try:
        return ServiceConfig(**{k: _coerce(k, v) for k, v in values.items()})
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad config value: {exc}") from exc


class Metrics:
    """Thread-safe request counters and a sliding latency window."""

    def __init__(self):
        self._lock = threading.Lock()
        self._counters: dict[str, int] = {}
        self._latencies: deque[float] = deque(maxlen=LATENCY_WINDOW)

    def inc(self, name: str, amount: int = 1) -> None:
        with self._lock:
            self._counters[name] = self._counters.get(name, 0) + amount

    def observe_latency(self, seconds: float) -> None:
        with self._lock:
            self._latencies.append(seconds)

    def snapshot(self) -> dict:
        with self._lock:
            counters = dict(sorted(self._counters.items()))
            samples = sorted(self._latencies)
        latency = {"count": len(samples), "p50_ms": 0.0, "p90_ms": 0.0, "max_ms": 0.0}
        if samples:
            latency["p50_ms"] = round(statistics.median(samples) * 1000.0, 3)
            # nearest-rank percentile; the window is small so exactness is cheap
            rank = max(0, -(-len(samples) * 9 // 10) - 1)
            latency["p90_ms"] = round(samples[rank] * 1000.0, 3)
            latency["max_ms"] = round(samples[-1] * 1000.0, 3)
        return {"counters": counters, "latency": latency}


class ItemizerService:
    """Pipeline, store, and review queue behind one object.

    Request handlers never hold pipeline results directly: every response
    body is rendered from the store, so concurrent callers of the same
    filing see byte-identical answers no matter who triggered processing.
    """

    def __init__(self, config: ServiceConfig, transport=None, clock=time.time):
        self.config = config
        self.clock = clock
        self.store = Store(config.store_path, clock=clock)
        self.fetcher = FilingFetcher(
            config.cache_dir,
            user_agent=config.user_agent,
            rate_limit=config.rate_limit,
            transport=transport,
        )
        self.dictionary = self._load_dictionary()
        self.scorer = self._load_scorer()
        self.metrics = Metrics()
        self._flight_lock = threading.Lock()
        self._flights: dict[str, threading.Event] = {}
        self._workers = threading.Semaphore(config.worker_limit)
        self._samples_seeded = False

    def _load_dictionary(self) -> KeywordDictionary:
        if self.config.dictionary_path is not None:
            return load_dictionary(self.config.dictionary_path)
        return default_dictionary()

    def _load_scorer(self) -> CandidateScorer:
        path = self.config.model_path
        if path is not None and Path(path).exists():
            return CandidateScorer.load(path)
        scorer = train_default_scorer(self.dictionary)
        if path is not None:
            scorer.save(path)
        return scorer

    # -- request entry points -------------------------------------------------

    def itemize(self, url: str | None, serial: str | None) -> FilingRow:
        """Resolve a reference, then serve from the store or process once."""
        if (url is None) == (serial is None):
            raise MalformedRef("request must carry exactly one of url or serial")
        if url is not None:
            ref = FilingRef(url=url)
            serial = serial_from_ref(ref)
        else:
            ref = None
            if not serial or "/" in serial or serial != serial.strip():
                raise MalformedRef(f"bad serial {serial!r}")
        return self._get_or_process(serial, ref)

    def get_filing(self, serial: str) -> FilingRow:
        row = self.store.get_filing(serial)
        if row is None:
            raise UnknownSerial(f"no stored filing for serial {serial}")
        return row

    def get_item(self, key: str):
        parse_key(key)  # malformed keys are a caller error, not a miss
        record = self.store.get_item(key)
        if record is None:
            raise UnknownSerial(f"no stored item for key {key}")
        return record

    # -- cache-or-process core --------------------------------------------------

    def _get_or_process(self, serial: str, ref: FilingRef | None) -> FilingRow:
        while True:
            row = self.store.get_filing(serial)
            if row is not None and row.pipeline_version == PIPELINE_VERSION:
                self.metrics.inc("store_hits")
                return row
            with self._flight_lock:
                row = self.store.get_filing(serial)
                if row is not None and row.pipeline_version == PIPELINE_VERSION:
                    self.metrics.inc("store_hits")
                    return row
                event = self._flights.get(serial)
                if event is None:
                    event = threading.Event()
                    self._flights[serial] = event
                    owner = True
                else:
                    owner = False
            if not owner:
                # someone else is processing this serial; wait and re-read
                event.wait(timeout=300.0)
                self.metrics.inc("requests_coalesced")
                continue
            try:
                data = self._fetch_bytes(serial, ref, stale=row)
                self._process(serial, data)
                fresh = self.store.get_filing(serial)
                if fresh is None:  # put_filing always writes; defensive only
                    raise TenkError(f"filing {serial} vanished after processing")
                return fresh
            finally:
                with self._flight_lock:
                    self._flights.pop(serial, None)
                event.set()

    def _fetch_bytes(self, serial: str, ref: FilingRef | None, stale: FilingRow | None) -> bytes:
        if ref is not None:
            return self.fetcher.fetch(ref).bytes
        cached = self.fetcher.cache_path(serial)
        if cached.exists() and cached.stat().st_size > 0:
            return cached.read_bytes()
        if stale is not None:
            # version bump reprocessing: the original bytes are in the store
            return stale.raw
        raise UnknownSerial(f"serial {serial} is neither stored nor cached")

    def _process(self, serial: str, data: bytes) -> None:
        self.metrics.inc("pipeline_executions")
        raw = RawFiling(serial=serial, bytes=data, fetched_at=self.clock())
        doc = parse_filing(raw)
        with self._workers:
            result = run_pipeline(
                doc,
                self.dictionary,
                scorer=self.scorer,
                skip_penalty=self.config.skip_penalty,
                threshold=self.config.threshold,
            )
        structure = self._structure_payload(result)
        tasks = self._review_tasks(doc, result)
        self.store.put_filing(
            serial=serial,
            pipeline_version=PIPELINE_VERSION,
            format_name=doc.format.value,
            raw=data,
            structure=structure,
            segments=list(result.segments),
            tasks=tasks,
            needs_review=result.needs_review,
        )

    def _structure_payload(self, result: ItemizedFiling) -> dict:
        flagged = {item for item, _ in result.reconstruction.flagged}
        spans = {s.item: s for s in result.segments}
        items = []
        for a in result.reconstruction.structure.assignments:
            seg = spans[a.item]
            items.append(
                {
                    "item": a.item.label,
                    "part": a.item.part,
                    "key": seg.key,
                    "title": self.dictionary.title_for(a.item),
                    "offset": a.offset,
                    "end_offset": seg.end_offset,
                    "probability": round(a.probability, 6),
                    "flagged": a.item in flagged,
                }
            )
        return {
            "score": round(result.structure_score, 6),
            "items": items,
            "skipped": [i.label for i in result.reconstruction.structure.skipped_items],
        }

    def _review_tasks(self, doc, result: ItemizedFiling) -> list[ReviewTask]:
        by_key = {(c.item, c.offset): c for c in result.candidates}
        assignments = {a.item: a for a in result.reconstruction.structure.assignments}
        candidates = list(result.candidates)
        text = doc.plain_text
        tasks = []
        for item, _reason in result.reconstruction.flagged:
            a = assignments[item]
            cand = by_key.get((item, a.offset))
            if cand is None:
                continue
            features = tuple(float(v) for v in extract_features(doc, cand, candidates))
            start = max(0, a.offset - EXCERPT_RADIUS_CHARS)
            end = min(len(text), a.offset + len(cand.matched_text) + EXCERPT_RADIUS_CHARS)
            tasks.append(
                ReviewTask(
                    task_id=new_task_id(),
                    serial=doc.source_serial,
                    item=item.label,
                    offset=a.offset,
                    probability=a.probability,
                    excerpt=text[start:end],
                    highlight_start=a.offset - start,
                    highlight_end=a.offset - start + len(cand.matched_text),
                    features=features,
                    status=STATUS_PENDING,
                    created_at=self.clock(),
                )
            )
        return tasks

    # -- review workflow --------------------------------------------------------

    def resolve_review(self, task_id: str, verdict: str, reviewer: str) -> ReviewTask:
        """Apply an expert verdict: patch the structure and log the label."""
        task = self.store.get_task(task_id)
        if task is None:
            raise UnknownTask(f"no review task {task_id}")
        resolved = self.store.resolve_task(task_id, verdict, reviewer)
        if resolved is None:
            raise VerdictConflict(f"task {task_id} already carries a verdict")
        row = self.store.get_filing(task.serial)
        if row is not None:
            self._apply_verdict(row, task, verdict)
        self.store.append_labeled_sample(task, label=(verdict == "accept"), reviewer=reviewer)
        self.metrics.inc("labels_appended")
        return resolved

    def _apply_verdict(self, row: FilingRow, task: ReviewTask, verdict: str) -> None:
        """Rebuild structure and item records with the verdict applied."""
        item = ItemId(task.item)
        kept = []
        for entry in row.structure["items"]:
            if entry["item"] == item.label and entry["offset"] == task.offset:
                if verdict == "reject":
                    continue
                entry = dict(entry, flagged=False)
            kept.append(entry)
        doc = parse_filing(
            RawFiling(serial=row.serial, bytes=row.raw, fetched_at=self.clock())
        )
        assignments = tuple(
            Assignment(ItemId(e["item"]), e["offset"], e["probability"]) for e in kept
        )
        assigned = {a.item for a in assignments}
        skipped = tuple(i for i in ALL_ITEMS if i not in assigned)
        penalties = skip_penalties(self.config.skip_penalty, detect_fiscal_year(doc))
        score = 0.0
        for entry_item in ALL_ITEMS:
            if entry_item in assigned:
                prob = next(a.probability for a in assignments if a.item == entry_item)
                score += log_odds(prob)
            else:
                score -= penalties[entry_item]
        structure = StructureHypothesis(
            assignments=assignments, total_score=score, skipped_items=skipped
        )
        flagged_items = frozenset(ItemId(e["item"]) for e in kept if e["flagged"])
        segments = segment(doc, structure, row.serial, flagged_items=flagged_items)
        spans = {s.item: s for s in segments}
        for entry in kept:
            entry["end_offset"] = spans[ItemId(entry["item"])].end_offset
        payload = {
            "score": round(score, 6),
            "items": kept,
            "skipped": [i.label for i in skipped],
        }
        pending = [
            t for t in self.store.list_tasks(STATUS_PENDING, serial=row.serial)
            if t.task_id != task.task_id
        ]
        needs_review = bool(pending) or not kept
        self.store.update_structure(row.serial, payload, segments, needs_review)

    # -- rendering and samples ----------------------------------------------------

    def render_filing(self, row: FilingRow) -> dict:
        pending = self.store.list_tasks(STATUS_PENDING, serial=row.serial)
        return {
            "serial": row.serial,
            "pipeline_version": row.pipeline_version,
            "format": row.format,
            "processed_at": row.processed_at,
            "needs_review": row.needs_review,
            "score": row.structure["score"],
            "items": row.structure["items"],
            "skipped": row.structure["skipped"],
            "review_tasks": [t.task_id for t in pending],
        }

    @staticmethod
    def render_task(task: ReviewTask) -> dict:
        return {
            "task_id": task.task_id,
            "serial": task.serial,
            "item": task.item,
            "offset": task.offset,
            "probability": task.probability,
            "excerpt": task.excerpt,
            "highlight_start": task.highlight_start,
            "highlight_end": task.highlight_end,
            "status": task.status,
            "created_at": task.created_at,
            "resolved_at": task.resolved_at,
            "reviewer": task.reviewer,
            "verdict": task.verdict,
        }

    def samples(self) -> list[dict]:
        """Bundled demo filings, copied into the fetch cache on first call."""
        directory = self.config.samples_dir
        if directory is None or not Path(directory).is_dir():
            return []
        entries = []
        for path in sorted(Path(directory).iterdir()):
            if not path.is_file():
                continue
            serial = path.stem
            if not self._samples_seeded:
                target = self.fetcher.cache_path(serial)
                if not target.exists():
                    target.write_bytes(path.read_bytes())
            entries.append({"serial": serial, "name": path.stem, "size": path.stat().st_size})
        self._samples_seeded = True
        return entries

    def close(self) -> None:
        self.store.close()


class ItemizeRequest(BaseModel):
    url: str | None = None
    serial: str | None = None


class VerdictRequest(BaseModel):
    verdict: Literal["accept", "reject"]
    reviewer: str = "anonymous"


_STATUS_FILTERS = {
    "pending": STATUS_PENDING,
    "accepted": STATUS_ACCEPTED,
    "rejected": STATUS_REJECTED,
}


def _error_response(exc: TenkError) -> HTTPException:
    if isinstance(exc, MalformedRef):
        return HTTPException(status_code=400, detail=str(exc))
    if isinstance(exc, (UnknownSerial, UnknownTask, NetworkError)):
        return HTTPException(status_code=404, detail=str(exc))
    if isinstance(exc, VerdictConflict):
        return HTTPException(status_code=409, detail=str(exc))
    if isinstance(exc, ParseError):
        return HTTPException(status_code=422, detail=str(exc))
    return HTTPException(status_code=500, detail=str(exc))


def create_app(
    config: ServiceConfig | None = None,
    service: ItemizerService | None = None,
    transport=None,
) -> FastAPI:
    """Wire an ItemizerService into a FastAPI application."""
    if service is None:
        service = ItemizerService(config or ServiceConfig(), transport=transport)

    @asynccontextmanager
    async def lifespan(_app: FastAPI):
        yield
        service.close()

    app = FastAPI(
        title="tenk itemization service", version=PIPELINE_VERSION, lifespan=lifespan
    )
    app.state.service = service
    app.add_middleware(
        CORSMiddleware,
        allow_origins=list(service.config.allowed_origins),
        allow_methods=["*"],
        allow_headers=["*"],
    )

    def require_token(request: Request) -> None:
        token = service.config.api_token
        if token is None:
            return
        if request.headers.get("x-api-key") != token:
            raise HTTPException(status_code=401, detail="missing or wrong API token")

    guarded = [Depends(require_token)]

    @app.middleware("http")
    async def track_metrics(request: Request, call_next):
        started = time.perf_counter()
        try:
            response = await call_next(request)
        finally:
            service.metrics.observe_latency(time.perf_counter() - started)
            service.metrics.inc("requests_total")
        return response

    @app.exception_handler(TenkError)
    async def tenk_error_handler(_request: Request, exc: TenkError):
        handled = _error_response(exc)
        return JSONResponse(
            status_code=handled.status_code, content={"detail": handled.detail}
        )

    @app.post("/itemize", dependencies=guarded)
    def itemize(body: ItemizeRequest, response: Response) -> dict:
        service.metrics.inc("itemize_requests")
        row = service.itemize(body.url, body.serial)
        rendered = service.render_filing(row)
        if not rendered["items"]:
            rendered["detail"] = "no item structure found"
            response.status_code = 422
        return rendered

    @app.get("/filings/{serial}", dependencies=guarded)
    def get_filing(serial: str) -> dict:
        return service.render_filing(service.get_filing(serial))

    @app.get("/items/{key:path}", dependencies=guarded)
    def get_item(key: str) -> dict:
        record = service.get_item(key)
        return {
            "key": record.key,
            "serial": record.serial,
            "value": record.value,
            "stored_at": record.stored_at,
            "pipeline_version": record.pipeline_version,
        }

    @app.get("/review", dependencies=guarded)
    def list_review(status: str = "pending", serial: str | None = None) -> dict:
        if status == "all":
            wanted = None
        elif status in _STATUS_FILTERS:
            wanted = _STATUS_FILTERS[status]
        else:
            raise HTTPException(status_code=400, detail=f"unknown status filter {status!r}")
        tasks = service.store.list_tasks(wanted, serial=serial)
        return {"tasks": [service.render_task(t) for t in tasks]}

    @app.get("/review/{task_id}", dependencies=guarded)
    def get_review(task_id: str) -> dict:
        task = service.store.get_task(task_id)
        if task is None:
            raise HTTPException(status_code=404, detail=f"no review task {task_id}")
        return service.render_task(task)

    @app.post("/review/{task_id}", dependencies=guarded)
    def post_verdict(task_id: str, body: VerdictRequest) -> dict:
        service.metrics.inc("review_verdicts")
        resolved = service.resolve_review(task_id, body.verdict, body.reviewer)
        row = service.store.get_filing(resolved.serial)
        return {
            "task": service.render_task(resolved),
            "filing": service.render_filing(row) if row else None,
        }

    @app.get("/samples", dependencies=guarded)
    def list_samples() -> dict:
        return {"samples": service.samples()}

    @app.get("/metrics")
    def metrics() -> dict:
        return service.metrics.snapshot()

    @app.get("/healthz")
    def healthz() -> dict:
        return {
            "status": "ok",
            "pipeline_version": PIPELINE_VERSION,
            "dictionary_version": service.dictionary.version,
        }

    if service.config.static_dir is not None and Path(service.config.static_dir).is_dir():
        app.mount(
            "/ui",
            StaticFiles(directory=service.config.static_dir, html=True),
            name="ui",
        )

    return app
