"""Merge the caption AMRs of one image into a single meta-AMR.

The pipeline is node union keyed by concept, whitelist-filtered edge merge
where the first caption to connect a concept pair wins, selection of the
largest weakly connected component, and one-hop hypernym refinement of
non-predicate nodes.
"""

from __future__ import annotations

import os
from collections import defaultdict, deque
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

from .graph import AmrGraph, Attribute, Edge, canonical_role, canonicalize_edges, is_inverse, is_predicate
from .lexicon import Lexicon

DEFAULT_ROLES = (
    ":ARG0", ":ARG1", ":ARG2", ":ARG3", ":ARG4", ":op1", ":op2", ":op3", ":op4",
    ":mod", ":location", ":quant", ":poss", ":part", ":manner", ":time",
    ":domain", ":instrument", ":accompanier", ":purpose",
)


class MergeError(ValueError):
    pass


@dataclass(frozen=True)
class RelationWhitelist:
    roles: tuple[str, ...]

    def __post_init__(self):
        roles = tuple(dict.fromkeys(self.roles))
        if not roles:
            raise MergeError("relation whitelist is empty")
        for r in roles:
            if not r.startswith(":") or len(r) < 2:
                raise MergeError(f"malformed role {r!r} in whitelist")
            if is_inverse(r):
                raise MergeError(f"whitelist role {r!r} is not canonical")
        object.__setattr__(self, "roles", roles)
        object.__setattr__(self, "_set", frozenset(roles))

    def __contains__(self, role: str) -> bool:
        return role in self._set

    def __iter__(self):
        return iter(self.roles)

    def __len__(self):
        return len(self.roles)

    @classmethod
    def default(cls) -> RelationWhitelist:
        return cls(DEFAULT_ROLES)

    @classmethod
    def from_roles(cls, roles: Iterable[str]) -> RelationWhitelist:
        return cls(tuple(roles))


def parse_whitelist(text: str) -> RelationWhitelist:
    """One role per line with ``#`` comments.

    A CSV relation histogram (``role,count`` with a header) is accepted too,
    so the stats output can be fed straight back in.
    """
    roles = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        role = line.split(",", 1)[0].split("\t", 1)[0].strip()
        if role == "role":
            continue
        roles.append(role)
    return RelationWhitelist(tuple(roles))


def load_whitelist(path: str | os.PathLike | None = None) -> RelationWhitelist:
    if path is None:
        return parse_whitelist(resources.files("amrforge.data").joinpath("whitelist.txt").read_text(encoding="utf-8"))
    return parse_whitelist(Path(path).read_text(encoding="utf-8"))


@dataclass(frozen=True)
class CaptionAmrSet:
    image_id: str
    graphs: tuple[AmrGraph, ...]

    def __post_init__(self):
        object.__setattr__(self, "graphs", tuple(self.graphs))
        if not self.graphs:
            raise MergeError(f"image {self.image_id!r} has no caption AMRs")

    @property
    def k(self) -> int:
        return len(self.graphs)


@dataclass
class MergedNode:
    concept: str
    provenance: list[tuple[int, str]] = field(default_factory=list)
    attributes: dict[str, str] = field(default_factory=dict)


@dataclass
class MergedEdge:
    source: str
    role: str
    target: str
    provenance: tuple[int, str, str] | None = None


@dataclass
class MergedGraph:
    """Accumulator keyed by concept; ``edge_map`` keys are (source, target) concepts."""

    nodes: dict[str, MergedNode] = field(default_factory=dict)
    edge_map: dict[tuple[str, str], MergedEdge] = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)

    def has_pair(self, a: str, b: str) -> bool:
        return (a, b) in self.edge_map or (b, a) in self.edge_map

    @property
    def num_nodes(self) -> int:
        return len(self.nodes)

    @property
    def num_edges(self) -> int:
        return len(self.edge_map)

    def concepts(self) -> set[str]:
        return set(self.nodes)


def merge_nodes(caption_set: CaptionAmrSet, whitelist: RelationWhitelist | None = None) -> MergedGraph:
    """Union of caption node sets; same-concept nodes become one node.

    Attributes ride along on their node, first caption wins per role, and
    only whitelisted attribute roles are kept when ``whitelist`` is given.
    """
    acc = MergedGraph()
    for ci, g in enumerate(caption_set.graphs):
        seen_here: dict[str, str] = {}
        for v in g.variables:
            c = g.concepts[v]
            if c in seen_here:
                acc.notes.append(f"caption {ci}: {v} and {seen_here[c]} share concept {c!r}; collapsed")
            else:
                seen_here[c] = v
            node = acc.nodes.setdefault(c, MergedNode(c))
            node.provenance.append((ci, v))
        for a in g.attributes:
            role = canonical_role(a.role)
            if whitelist is not None and role not in whitelist:
                continue
            acc.nodes[g.concepts[a.source]].attributes.setdefault(role, a.value)
    return acc


def merge_edges(acc: MergedGraph, caption_set: CaptionAmrSet, whitelist: RelationWhitelist) -> MergedGraph:
    """Add caption edges in order; a pair already joined in either direction is skipped."""
    for ci, g in enumerate(caption_set.graphs):
        g = canonicalize_edges(g)
        for s, r, t in g.edges:
            if r not in whitelist:
                continue
            ns, nt = g.concepts[s], g.concepts[t]
            if ns == nt:
                acc.notes.append(f"caption {ci}: dropped self-loop {ns} {r} {nt}")
                continue
            if acc.has_pair(ns, nt):
                continue
            acc.edge_map[(ns, nt)] = MergedEdge(ns, r, nt, (ci, s, t))
    return acc


def connected_components(acc: MergedGraph) -> list[list[str]]:
    """Weakly connected components, each listed in node insertion order."""
    adj: dict[str, list[str]] = defaultdict(list)
    for a, b in acc.edge_map:
        adj[a].append(b)
        adj[b].append(a)
    seen: set[str] = set()
    components = []
    for start in acc.nodes:
        if start in seen:
            continue
        seen.add(start)
        members = {start}
        queue = deque([start])
        while queue:
            v = queue.popleft()
            for w in adj[v]:
                if w not in seen:
                    seen.add(w)
                    members.add(w)
                    queue.append(w)
        components.append([c for c in acc.nodes if c in members])
    return components


def _subgraph(acc: MergedGraph, keep: set[str]) -> MergedGraph:
    return MergedGraph(
        nodes={c: n for c, n in acc.nodes.items() if c in keep},
        edge_map={k: e for k, e in acc.edge_map.items() if k[0] in keep},
        notes=list(acc.notes),
    )


def largest_component(acc: MergedGraph) -> MergedGraph:
    """Component with most nodes; ties go to more edges, then the smallest concept key."""
    if not acc.nodes:
        raise MergeError("cannot take the largest component of an empty graph")
    components = connected_components(acc)
    edge_count = defaultdict(int)
    comp_of = {c: i for i, comp in enumerate(components) for c in comp}
    for a, _ in acc.edge_map:
        edge_count[comp_of[a]] += 1
    best = min(
        range(len(components)),
        key=lambda i: (-len(components[i]), -edge_count[i], min(components[i])),
    )
    return _subgraph(acc, set(components[best]))


def refine_nodes(acc: MergedGraph, lexicon: Lexicon) -> tuple[MergedGraph, list[tuple[str, str]]]:
    """Relabel non-predicate nodes with their hypernym and re-merge collisions.

    Returns the refined graph and the list of ``(concept, hypernym)``
    substitutions that were applied.
    """
    relabel = {}
    log = []
    for c in acc.nodes:
        h = lexicon.hypernym(c)
        relabel[c] = h if h is not None else c
        if h is not None:
            log.append((c, h))

    out = MergedGraph(notes=list(acc.notes))
    for c, node in acc.nodes.items():
        key = relabel[c]
        merged = out.nodes.get(key)
        if merged is None:
            out.nodes[key] = MergedNode(key, list(node.provenance), dict(node.attributes))
        else:
            out.notes.append(f"refinement merged {c!r} into {key!r}")
            merged.provenance.extend(node.provenance)
            for role, value in node.attributes.items():
                merged.attributes.setdefault(role, value)
    for edge in acc.edge_map.values():
        s, t = relabel[edge.source], relabel[edge.target]
        if s == t:
            out.notes.append(f"refinement dropped self-loop {edge.source} {edge.role} {edge.target}")
            continue
        if out.has_pair(s, t):
            continue
        out.edge_map[(s, t)] = MergedEdge(s, edge.role, t, edge.provenance)
    return out, log


def select_root(acc: MergedGraph) -> str:
    """Highest out-degree; ties prefer predicates, then the smallest concept."""
    out_degree = defaultdict(int)
    for s, _ in acc.edge_map:
        out_degree[s] += 1
    return min(acc.nodes, key=lambda c: (-out_degree[c], not is_predicate(c), c))


def _variable_names(concepts: Sequence[str]) -> list[str]:
    used: dict[str, int] = defaultdict(int)
    names = []
    for c in concepts:
        base = c[0].lower() if c[:1].isalpha() else "x"
        used[base] += 1
        names.append(base if used[base] == 1 else f"{base}{used[base]}")
    return names


def to_amr_graph(acc: MergedGraph, root: str | None = None) -> tuple[AmrGraph, dict[str, str]]:
    """Convert a connected merged graph; also returns the concept-to-variable map."""
    if root is None:
        root = select_root(acc)
    order = list(acc.nodes)
    var = dict(zip(order, _variable_names(order)))
    graph = AmrGraph(
        variables=[var[c] for c in order],
        concepts={var[c]: c for c in order},
        edges=[Edge(var[e.source], e.role, var[e.target]) for e in acc.edge_map.values()],
        attributes=[Attribute(var[c], r, v) for c in order for r, v in acc.nodes[c].attributes.items()],
        root=var[root],
    )
    return graph, var


@dataclass
class MetaAmr:
    image_id: str
    graph: AmrGraph
    provenance: dict[str, list[tuple[int, str]]]
    refinement_log: list[tuple[str, str]]
    notes: list[str] = field(default_factory=list)
    component: MergedGraph | None = field(default=None, repr=False)
    refined: MergedGraph | None = field(default=None, repr=False)


def build_meta_amr(
    caption_set: CaptionAmrSet,
    whitelist: RelationWhitelist | None = None,
    lexicon: Lexicon | None = None,
) -> MetaAmr:
    """Run the whole merge-and-refine pipeline for one image."""
    whitelist = whitelist or RelationWhitelist.default()
    lexicon = lexicon or Lexicon()
    acc = merge_nodes(caption_set, whitelist)
    acc = merge_edges(acc, caption_set, whitelist)
    component = largest_component(acc)
    refined, log = refine_nodes(component, lexicon)
    graph, var = to_amr_graph(refined)
    return MetaAmr(
        image_id=caption_set.image_id,
        graph=graph,
        provenance={var[c]: list(n.provenance) for c, n in refined.nodes.items()},
        refinement_log=log,
        notes=list(refined.notes),
        component=component,
        refined=refined,
    )
