"""storymap: extract weighted storyline graphs from timestamped headlines.

Pipeline: corpus -> embeddings -> topic clusters -> pairwise coherence ->
weakest-link LP -> rounded st-graph -> main route + landmark analysis ->
JSON/DOT/HTML rendering.
"""

from .analyze import Analysis, analyze_map, main_route, maximum_antichain, width
from .coherence import (CoherenceEntry, CoherenceTable, build_table, coherence,
                        edge_membership, normalize_outgoing, table_to_csv)
from .corpus import (Corpus, Event, filter_top_sources, load_corpus,
                     select_endpoints)
from .embed import (EmbeddingMatrix, angular_similarity, builtin_embed,
                    load_embeddings)
from .errors import (InfeasibleError, InputError, InternalError, StorymapError)
from .extract import (ClusterCoverage, CoverageReport, ExtractionConfig,
                      LinearProgram, LpSolution, MapEdge, NarrativeMap,
                      build_lp, compute_coverage, round_solution, solve_lp,
                      verify)
from .render import RenderOptions, from_json, to_dot, to_html, to_json
from .topics import (TopicModel, js_similarity, label_topics, load_topics,
                     reduce, soft_cluster)

__version__ = "0.1.0"

__all__ = [
    "Analysis", "ClusterCoverage", "CoherenceEntry", "CoherenceTable",
    "Corpus", "CoverageReport", "EmbeddingMatrix", "Event", "ExtractionConfig",
    "InfeasibleError", "InputError", "InternalError", "LinearProgram",
    "LpSolution", "MapEdge", "NarrativeMap", "RenderOptions", "StorymapError",
    "TopicModel", "analyze_map", "angular_similarity", "build_lp",
    "build_table", "builtin_embed", "coherence", "compute_coverage",
    "edge_membership", "filter_top_sources", "from_json", "js_similarity",
    "label_topics", "load_corpus", "load_embeddings", "load_topics",
    "main_route", "maximum_antichain", "normalize_outgoing", "reduce",
    "round_solution", "select_endpoints", "soft_cluster", "solve_lp",
    "table_to_csv", "to_dot", "to_html", "to_json", "verify", "width",
]
