"""Caption AMR tooling: PENMAN I/O, linearization, meta-AMR merging, metrics and corpus statistics."""

from .estimators import AmrLinearizer, MetaAmrBuilder
from .graph import AmrError, AmrGraph, Attribute, Edge, canonical_role, canonicalize_edges, is_isomorphic, is_predicate, triples
from .lexicon import Lexicon, LexiconError, load_lexicon, parse_lexicon
from .linearize import LinearizationError, delinearize, linearize
from .merge import CaptionAmrSet, MergeError, MetaAmr, RelationWhitelist, build_meta_amr, load_whitelist
from .metrics import node_pr_by_category, score_against_references, sembleu, smatch, smatch_oracle
from .penman import PenmanError, parse_penman, serialize_penman
from .stats import categorize_corpus, categorize_scene_graphs, complexity_stats, relation_histogram

__all__ = [
    "AmrError", "AmrGraph", "AmrLinearizer", "Attribute", "CaptionAmrSet", "Edge", "Lexicon", "LexiconError",
    "LinearizationError", "MergeError", "MetaAmr", "MetaAmrBuilder", "PenmanError", "RelationWhitelist",
    "build_meta_amr", "canonical_role", "canonicalize_edges", "categorize_corpus", "categorize_scene_graphs",
    "complexity_stats", "delinearize", "is_isomorphic", "is_predicate", "linearize", "load_lexicon",
    "load_whitelist", "node_pr_by_category", "parse_lexicon", "parse_penman", "relation_histogram",
    "score_against_references", "sembleu", "serialize_penman", "smatch", "smatch_oracle", "triples",
]
