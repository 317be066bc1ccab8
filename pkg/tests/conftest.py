"""Shared builders for synthetic corpora and hand-built maps."""

from __future__ import annotations

import random
from datetime import datetime, timedelta, timezone

import pytest

from storymap.corpus import Corpus, Event
from storymap.extract import MapEdge, NarrativeMap

BASE = datetime(2020, 1, 1, tzinfo=timezone.utc)

THEME_WORDS = [
    ("virus", "outbreak", "hospital", "cases", "infection"),
    ("market", "stocks", "economy", "trading", "investors"),
    ("travel", "flights", "airport", "border", "quarantine"),
    ("vaccine", "research", "trial", "scientists", "immunity"),
    ("school", "students", "classes", "campus", "teachers"),
]

FILLERS = ("today", "latest", "officials", "report", "update", "new", "rise",
           "response", "warning", "plan")

SOURCES = ("heralds.example", "wire.example", "daily.example",
           "tribune.example", "observer.example", "gazette.example")


def make_event(i: int, hours: float, headline: str, source: str = "wire.example",
               url: str | None = None) -> Event:
    return Event(id=f"e{i:03d}", timestamp=BASE + timedelta(hours=hours),
                 headline=headline, source=source, url=url)


def make_corpus(headlines: list[str], hours_step: float = 24.0,
                sources: tuple[str, ...] = SOURCES) -> Corpus:
    events = [make_event(i, i * hours_step, text, sources[i % len(sources)])
              for i, text in enumerate(headlines)]
    return Corpus(events=tuple(events))


def themed_corpus(n: int, n_themes: int = 3, seed: int = 0,
                  span_hours: float = 24.0 * 30) -> Corpus:
    """Synthetic news corpus with token-heavy theme templates so that the
    built-in embedder separates the themes cleanly."""
    rng = random.Random(seed)
    events = []
    for i in range(n):
        theme = THEME_WORDS[i % n_themes]
        extra = rng.sample(FILLERS, 2)
        words = list(theme[:4]) + extra
        rng.shuffle(words)
        headline = " ".join(words)
        hours = span_hours * i / max(n - 1, 1)
        events.append(make_event(i, hours, headline, SOURCES[i % len(SOURCES)]))
    return Corpus(events=tuple(events))


def build_map(node_days: list[tuple[str, float]],
              edge_specs: list[tuple[str, str, float, float | None]],
              s: str | None = None, t: str | None = None) -> NarrativeMap:
    """Hand-built map: nodes as (id, day offset), edges as
    (i, j, coherence, probability)."""
    nodes = tuple(
        Event(id=name, timestamp=BASE + timedelta(days=day),
              headline=f"headline {name}", source="wire.example")
        for name, day in node_days)
    edges = tuple(MapEdge(i=i, j=j, coherence=c, probability=p)
                  for i, j, c, p in edge_specs)
    ordered = sorted(nodes, key=lambda e: e.order_key)
    return NarrativeMap(nodes=nodes, edges=edges,
                        s=s or ordered[0].id, t=t or ordered[-1].id)


def chain_map(probabilities: list[float]) -> NarrativeMap:
    """Single chain n0 -> n1 -> ... with the given edge probabilities."""
    names = [f"n{i}" for i in range(len(probabilities) + 1)]
    node_days = [(name, float(i)) for i, name in enumerate(names)]
    edges = [(names[i], names[i + 1], p, p)
             for i, p in enumerate(probabilities)]
    return build_map(node_days, edges)


@pytest.fixture
def small_corpus() -> Corpus:
    return make_corpus([
        "virus outbreak hits the city",
        "virus cases rise in hospital wards",
        "markets fall on outbreak fears",
        "stocks slide as investors panic",
        "virus response plan announced",
        "economy braces for outbreak impact",
    ])
