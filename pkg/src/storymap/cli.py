"""End-to-end command line: pipeline, analyze, and inspect-topics.

Config precedence is flags > config file > defaults. Every exit path prints
one machine-parseable line `status=<ok|input|infeasible|internal>`.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, fields
from pathlib import Path

from . import analyze as analyze_mod
from . import coherence as coherence_mod
from . import corpus as corpus_mod
from . import embed as embed_mod
from . import extract as extract_mod
from . import render as render_mod
from . import topics as topics_mod
from .errors import InfeasibleError, InputError, InternalError, StorymapError

CAP_THRESHOLD = 150
CAP_VALUE = 20


@dataclass
class PipelineConfig:
    input_path: str = ""
    format: str | None = None
    embeddings_path: str | None = None
    embed_dim: int = 64
    topics_path: str | None = None
    min_cluster_size: int = 3
    reduce_dim: int = 8
    start_id: str | None = None
    end_id: str | None = None
    top_sources: int | None = None
    k_min: int = 6
    mincover: float = 0.8
    round_threshold: float = 0.5
    seed: int = 0
    out_dir: str = "out"
    show_sources: bool = True


# config-file key (dashes/underscores stripped, lowercased) -> field name
_KEY_TO_FIELD = {
    "input": "input_path",
    "format": "format",
    "embeddings": "embeddings_path",
    "embeddim": "embed_dim",
    "topics": "topics_path",
    "minclustersize": "min_cluster_size",
    "reducedim": "reduce_dim",
    "start": "start_id",
    "end": "end_id",
    "topsources": "top_sources",
    "kmin": "k_min",
    "mincover": "mincover",
    "roundthreshold": "round_threshold",
    "seed": "seed",
    "out": "out_dir",
    "showsources": "show_sources",
}


def _coerce(field_name: str, raw: str):
    kind = {f.name: f.type for f in fields(PipelineConfig)}[field_name]
    if "int" in kind:
        return int(raw)
    if "float" in kind:
        return float(raw)
    if "bool" in kind:
        return raw.strip().lower() in ("1", "true", "yes", "on")
    return raw


def read_config_file(path: str | Path) -> dict:
    """Parse flat key=value lines; keys match flags with dashes removed."""
    path = Path(path)
    if not path.exists():
        raise InputError(f"config file not found: {path}")
    values = {}
    for line_num, line in enumerate(path.read_text(encoding="utf-8").splitlines(),
                                    start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise InputError(f"{path}:{line_num}: expected key=value")
        key, _, raw = line.partition("=")
        key = key.strip().lower().replace("-", "").replace("_", "")
        if key not in _KEY_TO_FIELD:
            raise InputError(f"{path}:{line_num}: unknown config key {key!r}")
        field_name = _KEY_TO_FIELD[key]
        try:
            values[field_name] = _coerce(field_name, raw.strip())
        except ValueError:
            raise InputError(f"{path}:{line_num}: bad value for {key!r}") from None
    return values


def resolve_config(args: argparse.Namespace) -> PipelineConfig:
    config = PipelineConfig()
    if getattr(args, "config", None):
        for field_name, value in read_config_file(args.config).items():
            setattr(config, field_name, value)
    for field_name in (f.name for f in fields(PipelineConfig)):
        value = getattr(args, field_name, None)
        if value is not None:
            setattr(config, field_name, value)
    if not config.input_path:
        raise InputError("no input corpus given (use --input or a config file)")
    return config


def _corpus_stage(config: PipelineConfig) -> corpus_mod.Corpus:
    fmt = config.format
    if fmt is None:
        suffix = Path(config.input_path).suffix.lower()
        fmt = {".csv": "csv", ".json": "json"}.get(suffix)
        if fmt is None:
            raise InputError(f"cannot infer format of {config.input_path!r}; "
                             "pass --format csv|json")
    loaded = corpus_mod.load_corpus(config.input_path, fmt)
    if config.top_sources is not None:
        loaded = corpus_mod.filter_top_sources(loaded, config.top_sources)
    return loaded


def _embedding_stage(config: PipelineConfig,
                     events: corpus_mod.Corpus) -> embed_mod.EmbeddingMatrix:
    if config.embeddings_path:
        return embed_mod.load_embeddings(events, config.embeddings_path)
    return embed_mod.builtin_embed(events, dim=config.embed_dim, seed=config.seed)


def _topic_stage(config: PipelineConfig, events: corpus_mod.Corpus,
                 embeddings: embed_mod.EmbeddingMatrix) -> topics_mod.TopicModel:
    if config.topics_path:
        return topics_mod.load_topics(events, config.topics_path)
    if config.reduce_dim < embeddings.dim:
        reduced = topics_mod.reduce(embeddings, target_dim=config.reduce_dim,
                                    seed=config.seed)
    else:
        reduced = embeddings  # already at or below the target dimension
    return topics_mod.soft_cluster(reduced, min_cluster_size=config.min_cluster_size,
                                   seed=config.seed)


@dataclass
class PipelineResult:
    narrative_map: extract_mod.NarrativeMap
    analysis: analyze_mod.Analysis
    coverage: extract_mod.CoverageReport
    lp_objective: float
    n_events: int
    out_files: dict[str, Path]


def run_pipeline(config: PipelineConfig) -> PipelineResult:
    """Execute all six phases and write map.json / map.dot / map.html plus
    a plain-text run report into the output directory."""
    events = _corpus_stage(config)
    start, end = corpus_mod.select_endpoints(events, config.start_id, config.end_id)
    embeddings = _embedding_stage(config, events)
    topic_model = _topic_stage(config, events, embeddings)

    cap = None if len(events) <= CAP_THRESHOLD else CAP_VALUE
    table = coherence_mod.build_table(events, embeddings, topic_model, cap=cap,
                                      endpoints=(start.id, end.id))
    extraction = extract_mod.ExtractionConfig(
        K=config.k_min, mincover=config.mincover,
        rounding_threshold=config.round_threshold, seed=config.seed)
    lp = extract_mod.build_lp(table, topic_model, start.id, end.id, extraction)
    solution = extract_mod.solve_lp(lp)
    rounded = extract_mod.round_solution(solution, table, topic_model,
                                         start.id, end.id, extraction, events)
    narrative_map = coherence_mod.normalize_outgoing(rounded)
    analysis = analyze_mod.analyze_map(narrative_map)
    coverage = extract_mod.compute_coverage(narrative_map, table, topic_model)
    report = extract_mod.verify(narrative_map, topic_model, table, extraction)
    if not report.ok:
        failed = "; ".join(f"{c.name}: {c.detail}" for c in report if not c.passed)
        raise InternalError(f"verification failed after rounding: {failed}")

    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    json_text = render_mod.to_json(narrative_map, analysis, coverage)
    dot_text = render_mod.to_dot(narrative_map, analysis,
                                 render_mod.RenderOptions(
                                     show_sources=config.show_sources))
    html_text = render_mod.to_html(dot_text, title=Path(config.input_path).stem)
    out_files = {
        "json": out_dir / "map.json",
        "dot": out_dir / "map.dot",
        "html": out_dir / "map.html",
        "report": out_dir / "report.txt",
    }
    out_files["json"].write_text(json_text, encoding="utf-8")
    out_files["dot"].write_text(dot_text, encoding="utf-8")
    out_files["html"].write_text(html_text, encoding="utf-8")

    weakest = narrative_map.weakest_link()
    lines = [
        "storymap run report",
        f"input={config.input_path}",
        f"events={len(events)}",
        f"start={start.id}",
        f"end={end.id}",
        f"clusters={topic_model.k}",
        f"candidate_pairs={len(table)}",
        f"lp_objective={solution.objective:.6f}",
        f"map_nodes={len(narrative_map.nodes)}",
        f"map_edges={len(narrative_map.edges)}",
        f"weakest_link={weakest:.6f}" if weakest is not None else "weakest_link=n/a",
        f"main_route_length={len(analysis.main_route)}",
        f"route_likelihood={analysis.route_likelihood:.6f}",
        f"route_ties={analysis.route_ties}",
        f"landmarks={','.join(analysis.landmarks)}",
        f"width={analysis.width}",
        "coverage=" + ",".join(
            f"{c.cluster}:{c.normalized:.4f}" if c.normalized is not None
            else f"{c.cluster}:absent" for c in coverage.clusters),
        f"coverage_average={coverage.average:.6f}",
        "status=ok",
    ]
    out_files["report"].write_text("\n".join(lines) + "\n", encoding="utf-8")
    return PipelineResult(narrative_map=narrative_map, analysis=analysis,
                          coverage=coverage, lp_objective=solution.objective,
                          n_events=len(events), out_files=out_files)


def cmd_pipeline(args: argparse.Namespace) -> int:
    config = resolve_config(args)
    result = run_pipeline(config)
    print(f"wrote {result.out_files['json']}, {result.out_files['dot']}, "
          f"{result.out_files['html']}")
    print(f"nodes={len(result.narrative_map.nodes)} "
          f"edges={len(result.narrative_map.edges)} "
          f"width={result.analysis.width} "
          f"coverage={result.coverage.average:.4f} "
          f"lp_objective={result.lp_objective:.4f}")
    if result.analysis.route_ties > 1:
        print(f"warning: {result.analysis.route_ties} maximum-likelihood routes; "
              "reported the lexicographically smallest")
    return 0


def cmd_analyze(args: argparse.Namespace) -> int:
    path = Path(args.map_json)
    if not path.exists():
        raise InputError(f"map JSON not found: {path}")
    narrative_map, stored, stored_cov = render_mod.from_json(
        path.read_text(encoding="utf-8"))
    recomputed = analyze_mod.analyze_map(narrative_map)

    mismatches = []
    if tuple(recomputed.main_route) != tuple(stored.main_route):
        mismatches.append(f"main_route: stored {list(stored.main_route)} != "
                          f"recomputed {list(recomputed.main_route)}")
    if tuple(recomputed.landmarks) != tuple(stored.landmarks):
        mismatches.append(f"landmarks: stored {list(stored.landmarks)} != "
                          f"recomputed {list(recomputed.landmarks)}")
    if recomputed.width != stored.width:
        mismatches.append(f"width: stored {stored.width} != "
                          f"recomputed {recomputed.width}")
    if abs(recomputed.route_likelihood - stored.route_likelihood) > max(
            1e-9, 1e-3 * stored.route_likelihood):
        mismatches.append(f"route_likelihood: stored {stored.route_likelihood} != "
                          f"recomputed {recomputed.route_likelihood}")
    for c in stored_cov.clusters:
        if c.normalized is None or c.cmax <= 0:
            continue
        if abs(c.normalized - c.cover / c.cmax) > 1e-3:
            mismatches.append(f"coverage[{c.cluster}]: stored {c.normalized} != "
                              f"cover/cmax {c.cover / c.cmax:.6f}")
    norm = stored_cov.normalized()
    if norm and abs(stored_cov.average - sum(norm) / len(norm)) > 1e-3:
        mismatches.append("average_coverage inconsistent with cluster values")

    print(f"main_route={' -> '.join(recomputed.main_route)}")
    print(f"route_likelihood={recomputed.route_likelihood:.6f}")
    print(f"landmarks={','.join(recomputed.landmarks)}")
    print(f"width={recomputed.width}")
    print(f"coverage_average={stored_cov.average:.6f}")
    if mismatches:
        raise InternalError("stored analysis does not match recomputation: "
                            + "; ".join(mismatches))
    print("stored analysis matches recomputation")
    return 0


def cmd_inspect_topics(args: argparse.Namespace) -> int:
    config = resolve_config(args)
    events = _corpus_stage(config)
    embeddings = _embedding_stage(config, events)
    topic_model = _topic_stage(config, events, embeddings)
    topic_model = topics_mod.label_topics(topic_model, events)

    sizes = [0] * (topic_model.k + 1)
    for event in events:
        sizes[topic_model.dominant(event.id)] += 1
    print(f"clusters={topic_model.k}")
    for q in range(topic_model.k):
        tokens = ",".join(topic_model.labels[q]) if topic_model.labels[q] else "-"
        print(f"cluster {q}: size={sizes[q]} top_tokens={tokens}")
    print(f"noise_fraction={sizes[topic_model.k] / len(events):.4f}")
    return 0


def _add_pipeline_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="flat key=value config file")
    parser.add_argument("--input", dest="input_path", help="corpus CSV/JSON file")
    parser.add_argument("--format", choices=("csv", "json"))
    parser.add_argument("--embeddings", dest="embeddings_path",
                        help="JSONL embedding sidecar (default: built-in embedder)")
    parser.add_argument("--embed-dim", dest="embed_dim", type=int,
                        help="built-in embedder dimension (default 64)")
    parser.add_argument("--topics", dest="topics_path",
                        help="JSONL topic sidecar (default: built-in clustering)")
    parser.add_argument("--min-cluster-size", dest="min_cluster_size", type=int,
                        help="smallest cluster kept by the built-in clustering")
    parser.add_argument("--reduce-dim", dest="reduce_dim", type=int,
                        help="dimension for pre-clustering reduction (default 8)")
    parser.add_argument("--start", dest="start_id", help="start event id")
    parser.add_argument("--end", dest="end_id", help="end event id")
    parser.add_argument("--top-sources", dest="top_sources", type=int,
                        help="keep only the n most prolific sources")
    parser.add_argument("--k-min", dest="k_min", type=int,
                        help="minimum number of active events (default 6)")
    parser.add_argument("--mincover", type=float,
                        help="minimum average cluster coverage (default 0.8)")
    parser.add_argument("--round-threshold", dest="round_threshold", type=float,
                        help="edge activation threshold when rounding (default 0.5)")
    parser.add_argument("--seed", type=int, help="deterministic seed (default 0)")
    parser.add_argument("--out", dest="out_dir", help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="storymap",
        description="Extract a narrative map from timestamped headlines.")
    sub = parser.add_subparsers(dest="command", required=True)

    pipeline = sub.add_parser("pipeline", help="run the full extraction pipeline")
    _add_pipeline_flags(pipeline)
    pipeline.set_defaults(func=cmd_pipeline)

    analyze = sub.add_parser("analyze", help="recompute analysis from a map JSON")
    analyze.add_argument("map_json", help="path to a pipeline map.json")
    analyze.set_defaults(func=cmd_analyze)

    inspect = sub.add_parser("inspect-topics", help="show the topic model")
    _add_pipeline_flags(inspect)
    inspect.set_defaults(func=cmd_inspect_topics)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        if exc.code in (0, None):
            print("status=ok")
            return 0
        print("status=input")
        return 2
    try:
        code = args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        print("status=input")
        return 2
    except InfeasibleError as exc:
        family = f" [{exc.family}]" if exc.family else ""
        print(f"infeasible{family}: {exc}", file=sys.stderr)
        print("status=infeasible")
        return 3
    except InternalError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        print("status=internal")
        return 4
    except StorymapError as exc:  # defensive: unmapped library error
        print(f"error: {exc}", file=sys.stderr)
        print("status=internal")
        return 4
    print("status=ok")
    return code


if __name__ == "__main__":
    sys.exit(main())
