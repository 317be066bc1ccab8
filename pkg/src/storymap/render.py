"""Serialize maps to canonical JSON, DOT, and a static HTML wrapper.

JSON output is canonical: sorted keys, fixed 6-decimal floats, trailing
newline, byte-identical across runs for identical inputs. DOT is the
interchange surface for external layout engines.
"""

from __future__ import annotations

import html
import json
from dataclasses import dataclass

from .analyze import Analysis
from .corpus import Event, parse_timestamp
from .errors import InputError
from .extract import ClusterCoverage, CoverageReport, MapEdge, NarrativeMap

DEFAULT_TITLE = "Narrative Map"
_MAIN_ROUTE_COLOR = "#1f4e9c"
_LANDMARK_FILL = "#b7e4c7"


@dataclass(frozen=True)
class RenderOptions:
    show_sources: bool = True
    width_scale: float = 4.0
    highlight_main_route: bool = True
    highlight_landmarks: bool = True
    highlight_endpoints: bool = True

    def __post_init__(self):
        if self.width_scale <= 0:
            raise InputError(f"width_scale must be positive, got {self.width_scale}")


def _canonical(value) -> str:
    if value is None:
        return "null"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.6f}"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, str):
        return json.dumps(value)
    if isinstance(value, (list, tuple)):
        return "[" + ",".join(_canonical(v) for v in value) + "]"
    if isinstance(value, dict):
        return "{" + ",".join(f"{json.dumps(k)}:{_canonical(value[k])}"
                              for k in sorted(value)) + "}"
    raise InputError(f"cannot serialize {type(value).__name__}")


def _stamp(event: Event) -> str:
    return event.timestamp.strftime("%Y-%m-%dT%H:%M:%SZ")


def to_json(narrative_map: NarrativeMap, analysis: Analysis,
            coverage: CoverageReport) -> str:
    """Canonical JSON document for the map plus its derived analysis."""
    document = {
        "nodes": [
            {"id": e.id, "timestamp": _stamp(e), "headline": e.headline,
             "source": e.source}
            for e in narrative_map.nodes
        ],
        "edges": [
            {"i": e.i, "j": e.j, "coherence": e.coherence,
             "probability": e.probability}
            for e in narrative_map.edges
        ],
        "s": narrative_map.s,
        "t": narrative_map.t,
        "main_route": list(analysis.main_route),
        "route_likelihood": analysis.route_likelihood,
        "route_ties": analysis.route_ties,
        "landmarks": list(analysis.landmarks),
        "width": analysis.width,
        "coverage": [
            {"cluster": c.cluster, "cover": c.cover, "cmax": c.cmax,
             "normalized": c.normalized}
            for c in coverage.clusters
        ],
        "average_coverage": coverage.average,
    }
    return _canonical(document) + "\n"


def from_json(text: str) -> tuple[NarrativeMap, Analysis, CoverageReport]:
    """Rebuild a map, analysis, and coverage report from to_json output."""
    try:
        document = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"malformed map JSON: {exc}") from None
    if not isinstance(document, dict):
        raise InputError("malformed map JSON: expected an object")
    required = ("nodes", "edges", "s", "t", "main_route", "landmarks",
                "width", "coverage", "average_coverage", "route_likelihood",
                "route_ties")
    missing = [k for k in required if k not in document]
    if missing:
        raise InputError(f"map JSON is missing keys: {missing}")
    try:
        nodes = tuple(
            Event(id=str(n["id"]), timestamp=parse_timestamp(n["timestamp"]),
                  headline=str(n["headline"]), source=str(n["source"]))
            for n in document["nodes"])
        edges = tuple(
            MapEdge(i=str(e["i"]), j=str(e["j"]),
                    coherence=float(e["coherence"]),
                    probability=None if e["probability"] is None
                    else float(e["probability"]))
            for e in document["edges"])
        narrative_map = NarrativeMap(nodes=nodes, edges=edges,
                                     s=str(document["s"]), t=str(document["t"]))
        analysis = Analysis(
            main_route=tuple(str(v) for v in document["main_route"]),
            route_likelihood=float(document["route_likelihood"]),
            route_ties=int(document["route_ties"]),
            landmarks=tuple(str(v) for v in document["landmarks"]),
            width=int(document["width"]))
        clusters = tuple(
            ClusterCoverage(cluster=int(c["cluster"]), cover=float(c["cover"]),
                            cmax=float(c["cmax"]),
                            normalized=None if c["normalized"] is None
                            else float(c["normalized"]))
            for c in document["coverage"])
        coverage = CoverageReport(clusters=clusters,
                                  average=float(document["average_coverage"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"malformed map JSON: {exc}") from None
    return narrative_map, analysis, coverage


def _dot_quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def to_dot(narrative_map: NarrativeMap, analysis: Analysis,
           options: RenderOptions | None = None) -> str:
    """DOT digraph: dated headline labels, bold endpoints, green landmark
    fills, a dashed main route, and stroke width growing with probability.

    Numeric weights are deliberately omitted from the drawing.
    """
    options = options or RenderOptions()
    landmarks = set(analysis.landmarks) if options.highlight_landmarks else set()
    route_edges: set[tuple[str, str]] = set()
    if options.highlight_main_route:
        route = analysis.main_route
        route_edges = set(zip(route, route[1:]))

    lines = ["digraph narrative {"]
    lines.append("  rankdir=TB;")
    lines.append('  node [shape=box, style="rounded,filled", fillcolor="white",'
                 ' fontname="Helvetica"];')
    lines.append('  edge [color="#555555"];')
    for event in narrative_map.nodes:
        label = f"{event.timestamp.strftime('%Y-%m-%d')} — {event.headline}"
        if options.show_sources:
            label += f" ({event.source})"
        attrs = [f"label={_dot_quote(label)}"]
        if options.highlight_endpoints and event.id in (narrative_map.s,
                                                        narrative_map.t):
            attrs.append('fontname="Helvetica-Bold"')
        if event.id in landmarks:
            attrs.append(f'fillcolor="{_LANDMARK_FILL}"')
        lines.append(f"  {_dot_quote(event.id)} [{', '.join(attrs)}];")
    for edge in narrative_map.edges:
        weight = edge.probability if edge.probability is not None else edge.coherence
        attrs = [f"penwidth={1.0 + options.width_scale * weight:.3f}"]
        if (edge.i, edge.j) in route_edges:
            attrs.append("style=dashed")
            attrs.append(f'color="{_MAIN_ROUTE_COLOR}"')
        lines.append(f"  {_dot_quote(edge.i)} -> {_dot_quote(edge.j)} "
                     f"[{', '.join(attrs)}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


_HTML_TEMPLATE = """<!DOCTYPE html>
<html lang="en">
<head>
<meta charset="utf-8">
<title>{title}</title>
<style>
body {{ font-family: Helvetica, Arial, sans-serif; margin: 2em; }}
h1 {{ font-size: 1.4em; }}
svg {{ max-width: 100%; height: auto; }}
g.node:hover {{ opacity: 0.75; cursor: pointer; }}
g.node:hover text {{ text-decoration: underline; }}
pre {{ background: #f4f4f4; padding: 1em; overflow-x: auto; }}
</style>
</head>
<body>
<h1>{title}</h1>
{body}
</body>
</html>
"""


def to_html(dot_or_svg: str, title: str = "") -> str:
    """Wrap rendered SVG (inlined) or DOT source (preformatted) in HTML."""
    title = title.strip() or DEFAULT_TITLE
    if "<svg" in dot_or_svg:
        body = dot_or_svg
    else:
        body = ("<p>Render with: <code>dot -Tsvg map.dot -o map.svg</code></p>\n"
                f"<pre>{html.escape(dot_or_svg)}</pre>")
    return _HTML_TEMPLATE.format(title=html.escape(title), body=body)
