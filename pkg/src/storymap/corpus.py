"""Load, validate, and filter the timestamped event corpus.

Events are ordered by the strict total order (timestamp, id); that order
drives edge direction everywhere downstream.
"""

from __future__ import annotations

import csv
import json
import re
import unicodedata
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from .errors import InputError

_DATE_ONLY_RE = re.compile(r"^\d{4}-\d{2}-\d{2}$")
# Lead bytes of UTF-8 sequences misdecoded as cp1252 show up as these chars.
_MOJIBAKE_RE = re.compile(r"[Â-Åâ][-¿€‚ƒ"
                          r"„…†‡ˆ‰Š‹Œ"
                          r"Ž‘’“”•–—˜"
                          r"™š›œžŸ]")

CSV_COLUMNS = ("id", "timestamp", "headline", "source", "url")
_REQUIRED = ("id", "timestamp", "headline", "source")


@dataclass(frozen=True)
class Event:
    """One timestamped headline record."""

    id: str
    timestamp: datetime
    headline: str
    source: str
    url: str | None = None

    @property
    def order_key(self) -> tuple[datetime, str]:
        return (self.timestamp, self.id)


@dataclass(frozen=True)
class Corpus:
    """Events sorted ascending by (timestamp, id), ids unique."""

    events: tuple[Event, ...] = field(default_factory=tuple)

    def __len__(self) -> int:
        return len(self.events)

    def __iter__(self):
        return iter(self.events)

    def ids(self) -> list[str]:
        return [e.id for e in self.events]

    def get(self, event_id: str) -> Event:
        for e in self.events:
            if e.id == event_id:
                return e
        raise InputError(f"unknown event id: {event_id!r}")

    def index_of(self, event_id: str) -> int:
        for i, e in enumerate(self.events):
            if e.id == event_id:
                return i
        raise InputError(f"unknown event id: {event_id!r}")


def repair_text(text: str) -> str:
    """Fix common mojibake (UTF-8 read as cp1252), normalize to NFC,
    and collapse runs of whitespace."""
    fixed = text
    for _ in range(2):
        if not _MOJIBAKE_RE.search(fixed):
            break
        try:
            candidate = fixed.encode("cp1252").decode("utf-8")
        except (UnicodeEncodeError, UnicodeDecodeError):
            break
        if candidate == fixed:
            break
        fixed = candidate
    fixed = unicodedata.normalize("NFC", fixed)
    return " ".join(fixed.split())


def parse_timestamp(raw: str) -> datetime:
    """Parse an ISO-8601 timestamp to UTC at second resolution.

    Date-only values become midnight UTC; naive values are taken as UTC.
    """
    text = raw.strip()
    if _DATE_ONLY_RE.match(text):
        text = text + "T00:00:00"
    if text.endswith(("Z", "z")):
        text = text[:-1] + "+00:00"
    try:
        stamp = datetime.fromisoformat(text)
    except ValueError:
        raise InputError(f"unparseable timestamp: {raw!r}") from None
    if stamp.tzinfo is None:
        stamp = stamp.replace(tzinfo=timezone.utc)
    else:
        stamp = stamp.astimezone(timezone.utc)
    return stamp.replace(microsecond=0)


def _build_event(record: dict, where: str) -> Event:
    for key in _REQUIRED:
        if key not in record or record[key] is None or str(record[key]).strip() == "":
            raise InputError(f"{where}: missing required field {key!r}")
    headline = repair_text(str(record["headline"]))
    if not headline:
        raise InputError(f"{where}: headline is empty after normalization")
    url = record.get("url")
    url = str(url).strip() if url not in (None, "") else None
    return Event(
        id=str(record["id"]).strip(),
        timestamp=parse_timestamp(str(record["timestamp"])),
        headline=headline,
        source=repair_text(str(record["source"])),
        url=url,
    )


def _validate(events: list[Event]) -> Corpus:
    if len(events) < 2:
        raise InputError(f"corpus needs at least 2 events, got {len(events)}")
    seen: dict[str, int] = {}
    for e in events:
        if e.id in seen:
            raise InputError(f"duplicate event id: {e.id!r}")
        seen[e.id] = 1
    events.sort(key=lambda e: e.order_key)
    return Corpus(events=tuple(events))


def load_corpus(path: str | Path, format: str) -> Corpus:
    """Read a CSV or JSON event file into a validated, sorted Corpus."""
    path = Path(path)
    if not path.exists():
        raise InputError(f"input file not found: {path}")
    if format not in ("csv", "json"):
        raise InputError(f"unknown corpus format: {format!r}")

    events: list[Event] = []
    if format == "csv":
        with path.open("r", encoding="utf-8", newline="") as handle:
            reader = csv.DictReader(handle)
            if reader.fieldnames is None:
                raise InputError(f"{path}: empty CSV file")
            missing = [c for c in _REQUIRED if c not in reader.fieldnames]
            if missing:
                raise InputError(f"{path}: missing CSV columns {missing}")
            for row in reader:
                events.append(_build_event(row, f"{path}:{reader.line_num}"))
    else:
        try:
            with path.open("r", encoding="utf-8") as handle:
                data = json.load(handle)
        except json.JSONDecodeError as exc:
            raise InputError(f"{path}: JSON parse failure at line {exc.lineno}") from None
        if not isinstance(data, list):
            raise InputError(f"{path}: JSON corpus must be an array of objects")
        for i, record in enumerate(data):
            if not isinstance(record, dict):
                raise InputError(f"{path}: record {i} is not an object")
            events.append(_build_event(record, f"{path}: record {i}"))
    return _validate(events)


def filter_top_sources(corpus: Corpus, n: int) -> Corpus:
    """Keep only events from the n sources with most events.

    Ties in count are broken by lexicographic source name; event order is
    preserved. Idempotent for fixed n.
    """
    if n < 1:
        raise InputError(f"top-sources n must be >= 1, got {n}")
    counts: dict[str, int] = {}
    for e in corpus:
        counts[e.source] = counts.get(e.source, 0) + 1
    ranked = sorted(counts, key=lambda s: (-counts[s], s))
    keep = set(ranked[:n])
    events = [e for e in corpus if e.source in keep]
    if len(events) < 2:
        raise InputError(
            f"top-{n} source filter leaves {len(events)} events; need at least 2")
    return Corpus(events=tuple(events))


def select_endpoints(corpus: Corpus,
                     start_id: str | None = None,
                     end_id: str | None = None) -> tuple[Event, Event]:
    """Pick the start and end events; defaults to chronological first/last."""
    start = corpus.get(start_id) if start_id is not None else corpus.events[0]
    end = corpus.get(end_id) if end_id is not None else corpus.events[-1]
    if not start.order_key < end.order_key:
        raise InputError(
            f"start event {start.id!r} does not precede end event {end.id!r}")
    return start, end
