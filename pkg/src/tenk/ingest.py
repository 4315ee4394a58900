"""Fetching raw filings from SEC EDGAR or local files, with a disk cache.

Serial numbers: EDGAR filings use their accession number verbatim; local
files get a content-hash-derived stand-in since nothing official exists.
Outbound requests honor EDGAR etiquette: a User-Agent identifying the
caller and a client-side rate limit.
"""

from __future__ import annotations

import hashlib
import os
import re
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path

import httpx

from .errors import MalformedRef, NetworkError

ACCESSION_RE = re.compile(r"^[0-9]{10}-[0-9]{2}-[0-9]{6}$")
DEFAULT_USER_AGENT = "tenk-itemizer research tool (contact: admin@example.com)"
DEFAULT_RATE_LIMIT = 5.0  # requests/sec, below EDGAR's published fair-access cap
USER_AGENT_ENV = "TENK_USER_AGENT"


@dataclass(frozen=True)
class FilingRef:
    """Points at one filing: either an EDGAR document URL or a local path."""

    url: str | None = None
    path: Path | None = None
    accession: str | None = None
    form_type: str = "10-K"

    def __post_init__(self):
        if (self.url is None) == (self.path is None):
            raise MalformedRef("exactly one of url/path must be set")
        if self.url is not None:
            if self.accession is None:
                object.__setattr__(self, "accession", _accession_from_url(self.url))
            if self.accession is None or not ACCESSION_RE.match(self.accession):
                raise MalformedRef(f"bad accession {self.accession!r} for {self.url}")

    @classmethod
    def from_accession(cls, accession: str) -> "FilingRef":
        """Build an EDGAR ref from an accession number alone.

        The full-submission text file lives under the filer's CIK, which is
        the first (zero-stripped) field of the accession number itself.
        """
        if not ACCESSION_RE.match(accession or ""):
            raise MalformedRef(f"bad accession {accession!r}")
        cik = str(int(accession.split("-")[0]))
        url = f"https://www.sec.gov/Archives/edgar/data/{cik}/{accession}.txt"
        return cls(url=url, accession=accession)


def _accession_from_url(url: str) -> str | None:
    m = re.search(r"([0-9]{10}-[0-9]{2}-[0-9]{6})", url)
    if m:
        return m.group(1)
    # Archive paths often carry the accession without dashes.
    m = re.search(r"/([0-9]{18})/", url)
    if m:
        d = m.group(1)
        return f"{d[:10]}-{d[10:12]}-{d[12:]}"
    return None


@dataclass(frozen=True)
class RawFiling:
    serial: str
    bytes: bytes
    fetched_at: float
    content_length: int = field(default=0)

    def __post_init__(self):
        if not self.bytes:
            raise ValueError("RawFiling.bytes must be non-empty")
        object.__setattr__(self, "content_length", len(self.bytes))


def serial_from_ref(ref: FilingRef) -> str:
    """Stable serial: accession for EDGAR refs, content hash for local files."""
    if ref.url is not None:
        return ref.accession  # type: ignore[return-value]
    try:
        digest = hashlib.sha256(ref.path.read_bytes()).hexdigest()  # type: ignore[union-attr]
    except OSError as exc:
        raise MalformedRef(f"unreadable local file {ref.path}: {exc}") from exc
    return "LOCAL-" + digest[:20]


class RateLimiter:
    """Token-style limiter: at most rate_per_sec calls per second.

    The clock is injectable so tests can assert the request budget without
    real sleeping.
    """

    def __init__(self, rate_per_sec: float, clock=time.monotonic, sleep=time.sleep):
        if rate_per_sec <= 0:
            raise ValueError("rate must be positive")
        self.interval = 1.0 / rate_per_sec
        self._clock = clock
        self._sleep = sleep
        self._lock = threading.Lock()
        self._next_allowed = 0.0

    def acquire(self):
        with self._lock:
            now = self._clock()
            wait = self._next_allowed - now
            if wait > 0:
                self._sleep(wait)
                now = self._next_allowed
            self._next_allowed = max(now, self._next_allowed) + self.interval


class FilingFetcher:
    """Downloads filings with caching, rate limiting, and single-flight fetches.

    Cache layout is one file per accession under cache_dir, named by serial,
    so entries are trivially inspectable.
    """

    def __init__(
        self,
        cache_dir: Path | str,
        user_agent: str | None = None,
        rate_limit: float = DEFAULT_RATE_LIMIT,
        transport: httpx.BaseTransport | None = None,
        clock=time.monotonic,
        sleep=time.sleep,
    ):
        self.cache_dir = Path(cache_dir)
        self.cache_dir.mkdir(parents=True, exist_ok=True)
        self.user_agent = (
            user_agent or os.environ.get(USER_AGENT_ENV) or DEFAULT_USER_AGENT
        )
        self.limiter = RateLimiter(rate_limit, clock=clock, sleep=sleep)
        self._transport = transport
        self._clock = clock
        self.request_count = 0
        self._flight_lock = threading.Lock()
        self._in_flight: dict[str, threading.Event] = {}

    def cache_path(self, serial: str) -> Path:
        return self.cache_dir / serial

    def fetch(self, ref: FilingRef) -> RawFiling:
        """Return the filing's bytes, from cache when present."""
        serial = serial_from_ref(ref)
        cached = self._read_cache(serial)
        if cached is not None:
            return cached

        if ref.path is not None:
            data = ref.path.read_bytes()
            self.cache_path(serial).write_bytes(data)
            return RawFiling(serial=serial, bytes=data, fetched_at=self._clock())

        # Single-flight per serial: concurrent requests for the same filing
        # trigger one download; the rest wait for the cache entry.
        while True:
            with self._flight_lock:
                cached = self._read_cache(serial)
                if cached is not None:
                    return cached
                event = self._in_flight.get(serial)
                if event is None:
                    event = threading.Event()
                    self._in_flight[serial] = event
                    leader = True
                else:
                    leader = False
            if not leader:
                event.wait()
                continue
            try:
                data = self._download(ref.url)  # type: ignore[arg-type]
                self.cache_path(serial).write_bytes(data)
                return RawFiling(serial=serial, bytes=data, fetched_at=self._clock())
            finally:
                with self._flight_lock:
                    self._in_flight.pop(serial, None)
                event.set()

    def _read_cache(self, serial: str) -> RawFiling | None:
        path = self.cache_path(serial)
        if path.exists():
            data = path.read_bytes()
            if data:
                return RawFiling(serial=serial, bytes=data, fetched_at=self._clock())
        return None

    def _download(self, url: str) -> bytes:
        self.limiter.acquire()
        self.request_count += 1
        headers = {"User-Agent": self.user_agent}
        try:
            with httpx.Client(transport=self._transport, follow_redirects=True) as client:
                resp = client.get(url, headers=headers, timeout=30.0)
        except httpx.HTTPError as exc:
            raise NetworkError(f"EDGAR unreachable: {exc}") from exc
        if resp.status_code != 200:
            raise NetworkError(f"EDGAR returned {resp.status_code} for {url}")
        if not resp.content:
            raise NetworkError(f"empty response body for {url}")
        return resp.content


def fetch_filing(
    ref: FilingRef,
    cache_dir: Path | str,
    user_agent: str | None = None,
    rate_limit: float = DEFAULT_RATE_LIMIT,
) -> RawFiling:
    """One-shot fetch without holding a fetcher around."""
    return FilingFetcher(cache_dir, user_agent=user_agent, rate_limit=rate_limit).fetch(ref)
