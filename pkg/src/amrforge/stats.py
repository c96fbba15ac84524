"""Corpus analytics: category distributions, relation histograms, graph complexity."""

from __future__ import annotations

import csv
import io
import json
from collections import Counter, defaultdict
from dataclasses import asdict, dataclass, field
from statistics import fmean
from typing import Iterable, Sequence

from .graph import AmrGraph, canonical_role, is_predicate
from .lexicon import ENTITY_CATEGORIES, RELATION_CATEGORIES, Lexicon
from .merge import MergedGraph, MetaAmr

ENTITIES = "Entities"
RELATIONS = "Relations"


def _group(category: str) -> str:
    return ENTITIES if category in ENTITY_CATEGORIES else RELATIONS


@dataclass
class CategoryRow:
    group: str
    category: str
    types: int
    tokens: int
    percent: float


@dataclass
class CorpusStats:
    rows: list[CategoryRow]
    uncategorized: dict[str, int]
    uncategorized_roles: int
    relation_histogram: list[tuple[str, int]]
    num_graphs: int
    mean_nodes: float
    mean_edges: float
    node_count_distribution: dict[int, int] = field(default_factory=dict)
    edge_count_distribution: dict[int, int] = field(default_factory=dict)

    def share(self, category: str) -> float:
        for row in self.rows:
            if row.category == category:
                return row.percent
        return 0.0

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["group", "category", "types", "tokens", "percent"])
        for r in self.rows:
            w.writerow([r.group, r.category, r.types, r.tokens, f"{r.percent:.4f}"])
        for group, n in self.uncategorized.items():
            denom = sum(r.tokens for r in self.rows if r.group == group) + n
            w.writerow([group, "uncategorized", "", n, f"{100 * n / denom if denom else 0.0:.4f}"])
        return buf.getvalue()

    def to_dict(self) -> dict:
        d = asdict(self)
        d["relation_histogram"] = [list(x) for x in self.relation_histogram]
        return d


class _Tally:
    def __init__(self):
        self.tokens: Counter = Counter()
        self.types: dict[str, set] = defaultdict(set)
        self.uncategorized = {ENTITIES: 0, RELATIONS: 0}
        self.uncategorized_roles = 0

    def concept(self, c: str, lexicon: Lexicon, default_group: str):
        cat = lexicon.category(c)
        if cat is None:
            self.uncategorized[default_group] += 1
        else:
            self.tokens[cat] += 1
            self.types[cat].add(c)

    def role(self, role: str, lexicon: Lexicon):
        cat = lexicon.role_category(role)
        if cat is None:
            self.uncategorized_roles += 1
        else:
            self.tokens[cat] += 1
            self.types[cat].add(canonical_role(role))

    def rows(self) -> list[CategoryRow]:
        denom = {
            g: sum(n for c, n in self.tokens.items() if _group(c) == g) + self.uncategorized[g]
            for g in (ENTITIES, RELATIONS)
        }
        out = []
        for cat in (*ENTITY_CATEGORIES, *RELATION_CATEGORIES):
            g = _group(cat)
            n = self.tokens.get(cat, 0)
            out.append(CategoryRow(g, cat, len(self.types.get(cat, ())), n, 100 * n / denom[g] if denom[g] else 0.0))
        return out


def categorize_corpus(graphs: Iterable[AmrGraph], lexicon: Lexicon) -> CorpusStats:
    """Assign every node and categorized role a category and report token shares.

    Uncategorized non-predicate nodes count toward the Entities denominator and
    uncategorized predicates toward Relations, so each group's shares sum to at
    most 100. Roles without a category are tallied separately and left out.
    """
    tally = _Tally()
    graphs = list(graphs)
    for g in graphs:
        for v in g.variables:
            c = g.concepts[v]
            tally.concept(c, lexicon, RELATIONS if is_predicate(c) else ENTITIES)
        for _, r, _ in g.edges:
            tally.role(r, lexicon)
    nodes = [g.num_nodes for g in graphs]
    edges = [len(g.edges) for g in graphs]
    return CorpusStats(
        rows=tally.rows(),
        uncategorized=dict(tally.uncategorized),
        uncategorized_roles=tally.uncategorized_roles,
        relation_histogram=relation_histogram(graphs) if graphs else [],
        num_graphs=len(graphs),
        mean_nodes=fmean(nodes) if nodes else 0.0,
        mean_edges=fmean(edges) if edges else 0.0,
        node_count_distribution=dict(sorted(Counter(nodes).items())),
        edge_count_distribution=dict(sorted(Counter(edges).items())),
    )


def categorize_scene_graphs(scene_graphs: Iterable[dict], lexicon: Lexicon) -> CorpusStats:
    """Same report for scene graphs given as ``{"objects": [...], "relations": [[s, p, o], ...]}``.

    Object names are entity tokens; relation predicates are relation tokens.
    """
    tally = _Tally()
    nodes, edges = [], []
    for sg in scene_graphs:
        objects = list(sg.get("objects", []))
        rels = list(sg.get("relations", []))
        for name in objects:
            tally.concept(str(name), lexicon, ENTITIES)
        for rel in rels:
            tally.concept(str(rel[1]), lexicon, RELATIONS)
        nodes.append(len(objects))
        edges.append(len(rels))
    return CorpusStats(
        rows=tally.rows(), uncategorized=dict(tally.uncategorized),
        uncategorized_roles=0, relation_histogram=[], num_graphs=len(nodes),
        mean_nodes=fmean(nodes) if nodes else 0.0, mean_edges=fmean(edges) if edges else 0.0,
    )


def relation_histogram(graphs: Iterable[AmrGraph], top_n: int | None = None) -> list[tuple[str, int]]:
    """Canonical role frequencies over all edges, most frequent first (ties by name)."""
    counts = Counter()
    n_graphs = 0
    for g in graphs:
        n_graphs += 1
        for _, r, _ in g.edges:
            counts[canonical_role(r)] += 1
    if n_graphs == 0:
        raise ValueError("relation histogram needs a nonempty corpus")
    table = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    return table if top_n is None else table[:top_n]


def histogram_csv(table: Sequence[tuple[str, int]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["role", "count"])
    w.writerows(table)
    return buf.getvalue()


@dataclass
class ComplexitySummary:
    num_graphs: int
    mean_nodes_before: float
    mean_edges_before: float
    mean_nodes_after: float
    mean_edges_after: float
    types_before: int
    types_after: int
    node_reduction: float
    edge_reduction: float
    type_reduction: float

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)


def _measure(x) -> tuple[int, int, set[str]]:
    if isinstance(x, MetaAmr):
        x = x.graph
    if isinstance(x, MergedGraph):
        return x.num_nodes, x.num_edges, x.concepts()
    if isinstance(x, AmrGraph):
        return x.num_nodes, len(x.edges), x.concept_set()
    raise TypeError(f"cannot measure {type(x).__name__}")


def _reduction(before: float, after: float) -> float:
    if before <= 0:
        return 0.0
    return min(1.0, max(0.0, (before - after) / before))


def complexity_stats(before: Sequence, after: Sequence) -> ComplexitySummary:
    """Mean sizes and distinct concept types of aligned unrefined/refined corpora."""
    if len(before) != len(after):
        raise ValueError(f"corpora are misaligned: {len(before)} vs {len(after)} graphs")
    if not before:
        raise ValueError("complexity statistics need a nonempty corpus")
    mb = [_measure(x) for x in before]
    ma = [_measure(x) for x in after]
    types_b = set().union(*(m[2] for m in mb))
    types_a = set().union(*(m[2] for m in ma))
    nb, eb = fmean(m[0] for m in mb), fmean(m[1] for m in mb)
    na, ea = fmean(m[0] for m in ma), fmean(m[1] for m in ma)
    return ComplexitySummary(
        num_graphs=len(before),
        mean_nodes_before=nb, mean_edges_before=eb,
        mean_nodes_after=na, mean_edges_after=ea,
        types_before=len(types_b), types_after=len(types_a),
        node_reduction=_reduction(nb, na), edge_reduction=_reduction(eb, ea),
        type_reduction=_reduction(len(types_b), len(types_a)),
    )
