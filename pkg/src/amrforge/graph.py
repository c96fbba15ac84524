"""AMR graph data model: variables, concepts, role-labelled edges and constants."""

from __future__ import annotations

import re
from collections import Counter, defaultdict, deque
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple

import networkx as nx

#: Roles ending in ``-of`` that are lexicalized, not inverses.
DEFAULT_INVERSE_EXCEPTIONS = frozenset({":consist-of", ":prep-out-of", ":prep-on-behalf-of"})

TOP_ROLE = ":TOP"
INSTANCE = "instance"

_PREDICATE_RE = re.compile(r"^[a-z0-9-]+-[0-9]{2}$")


class AmrError(ValueError):
    """Raised when a graph violates the AMR well-formedness invariants."""


def is_predicate(concept: str) -> bool:
    """True for PropBank-style frame concepts such as ``stand-01``."""
    return bool(_PREDICATE_RE.match(concept))


def is_inverse(role: str, exceptions: Iterable[str] = DEFAULT_INVERSE_EXCEPTIONS) -> bool:
    return role.endswith("-of") and role not in exceptions and len(role) > 4


def canonical_role(role: str, exceptions: Iterable[str] = DEFAULT_INVERSE_EXCEPTIONS) -> str:
    """Strip a true inverse suffix (``:ARG0-of`` -> ``:ARG0``); exception roles pass through."""
    if is_inverse(role, exceptions):
        return role[:-3]
    return role


def invert_role(role: str, exceptions: Iterable[str] = DEFAULT_INVERSE_EXCEPTIONS) -> str:
    """Role label that expresses the same edge read from its target."""
    if is_inverse(role, exceptions):
        return role[:-3]
    return role + "-of"


class Edge(NamedTuple):
    source: str
    role: str
    target: str


class Attribute(NamedTuple):
    source: str
    role: str
    value: str


class TripleSet(NamedTuple):
    """Smatch comparison universe of one graph."""

    instances: list[tuple[str, str, str]]
    relations: list[tuple[str, str, str]]
    attributes: list[tuple[str, str, str]]
    top: tuple[str, str, str]

    def all(self) -> list[tuple[str, str, str]]:
        return [*self.instances, *self.relations, *self.attributes, self.top]

    def __len__(self) -> int:  # type: ignore[override]
        return len(self.instances) + len(self.relations) + len(self.attributes) + 1


@dataclass(frozen=True)
class AmrGraph:
    """A rooted, labelled, directed multigraph in PENMAN's data model.

    ``variables`` is kept in first-seen order so that every operation that walks
    the graph is deterministic. Edges are stored as written (possibly with
    inverse roles); use :func:`canonicalize_edges` for a single orientation.
    Constants (strings keep their quotes, numbers, bare symbols such as ``-``)
    hang off nodes as ``attributes``.
    """

    variables: tuple[str, ...]
    concepts: dict[str, str]
    edges: tuple[Edge, ...]
    attributes: tuple[Attribute, ...]
    root: str
    metadata: tuple[str, ...] = field(default=(), compare=False)

    def __post_init__(self):
        object.__setattr__(self, "variables", tuple(self.variables))
        object.__setattr__(self, "edges", tuple(Edge(*e) for e in self.edges))
        object.__setattr__(self, "attributes", tuple(Attribute(*a) for a in self.attributes))
        object.__setattr__(self, "metadata", tuple(self.metadata))
        self._validate()

    def _validate(self):
        vs = set(self.variables)
        if not self.variables:
            raise AmrError("graph has no variables")
        if len(vs) != len(self.variables):
            raise AmrError("duplicate variable identifiers")
        if set(self.concepts) != vs:
            missing = vs.symmetric_difference(self.concepts)
            raise AmrError(f"variables and concept entries disagree: {sorted(missing)}")
        if self.root not in vs:
            raise AmrError(f"root {self.root!r} is not a variable")
        for e in self.edges:
            if e.source not in vs or e.target not in vs:
                raise AmrError(f"edge {tuple(e)} has an endpoint outside the graph")
            _check_role(e.role)
        for a in self.attributes:
            if a.source not in vs:
                raise AmrError(f"attribute {tuple(a)} hangs off an unknown variable")
            _check_role(a.role)
        unreachable = vs - _reachable(self.root, self.edges)
        if unreachable:
            raise AmrError(f"graph is disconnected; unreachable: {sorted(unreachable)}")

    def __hash__(self):
        return hash((self.variables, tuple(sorted(self.concepts.items())), self.edges, self.attributes, self.root))

    @property
    def num_nodes(self) -> int:
        return len(self.variables)

    def concept_set(self) -> set[str]:
        return set(self.concepts.values())

    def replace(self, **changes) -> AmrGraph:
        kw = dict(
            variables=self.variables, concepts=self.concepts, edges=self.edges,
            attributes=self.attributes, root=self.root, metadata=self.metadata,
        )
        kw.update(changes)
        return AmrGraph(**kw)


def _check_role(role: str):
    if not role or not role.startswith(":") or len(role) < 2:
        raise AmrError(f"malformed role label {role!r}")


def _reachable(root: str, edges: Iterable[Edge]) -> set[str]:
    adj: dict[str, list[str]] = defaultdict(list)
    for s, _, t in edges:
        adj[s].append(t)
        adj[t].append(s)
    seen = {root}
    queue = deque([root])
    while queue:
        v = queue.popleft()
        for w in adj[v]:
            if w not in seen:
                seen.add(w)
                queue.append(w)
    return seen


def triples(g: AmrGraph, exceptions: Iterable[str] = DEFAULT_INVERSE_EXCEPTIONS) -> TripleSet:
    """Instance, relation, attribute and root triples; relations in canonical orientation."""
    instances = [(v, INSTANCE, g.concepts[v]) for v in g.variables]
    relations = []
    for s, r, t in g.edges:
        if is_inverse(r, exceptions):
            relations.append((t, r[:-3], s))
        else:
            relations.append((s, r, t))
    attributes = [(a.source, a.role, a.value) for a in g.attributes]
    return TripleSet(instances, relations, attributes, (g.root, TOP_ROLE, g.concepts[g.root]))


def canonicalize_edges(g: AmrGraph, exceptions: Iterable[str] = DEFAULT_INVERSE_EXCEPTIONS) -> AmrGraph:
    """Flip every true inverse edge so all roles read source-to-target."""
    exceptions = frozenset(exceptions)
    edges = tuple(
        Edge(t, r[:-3], s) if is_inverse(r, exceptions) else Edge(s, r, t)
        for s, r, t in g.edges
    )
    if edges == g.edges:
        return g
    return g.replace(edges=edges)


def rename_variables(g: AmrGraph, mapping: dict[str, str]) -> AmrGraph:
    """Apply a variable bijection (unmapped names are kept)."""
    m = lambda v: mapping.get(v, v)  # noqa: E731
    renamed = [m(v) for v in g.variables]
    if len(set(renamed)) != len(renamed):
        raise AmrError("renaming is not injective")
    return AmrGraph(
        variables=renamed,
        concepts={m(v): c for v, c in g.concepts.items()},
        edges=[Edge(m(s), r, m(t)) for s, r, t in g.edges],
        attributes=[Attribute(m(s), r, v) for s, r, v in g.attributes],
        root=m(g.root),
        metadata=g.metadata,
    )


def prefix_variables(g: AmrGraph, prefix: str) -> AmrGraph:
    return rename_variables(g, {v: f"{prefix}{v}" for v in g.variables})


def _to_networkx(g: AmrGraph) -> nx.DiGraph:
    t = triples(g)
    attrs: dict[str, list] = defaultdict(list)
    for s, r, v in t.attributes:
        attrs[s].append((r, v))
    nxg = nx.DiGraph()
    for v in g.variables:
        nxg.add_node(v, label=(g.concepts[v], tuple(sorted(attrs[v])), v == g.root))
    roles: dict[tuple[str, str], Counter] = defaultdict(Counter)
    for s, r, tt in t.relations:
        roles[(s, tt)][r] += 1
    for (s, tt), c in roles.items():
        nxg.add_edge(s, tt, roles=tuple(sorted(c.items())))
    return nxg


def is_isomorphic(a: AmrGraph, b: AmrGraph) -> bool:
    """Triple-multiset equality up to a variable bijection."""
    if a.num_nodes != b.num_nodes or len(a.edges) != len(b.edges) or len(a.attributes) != len(b.attributes):
        return False
    if Counter(a.concepts.values()) != Counter(b.concepts.values()):
        return False
    return nx.is_isomorphic(
        _to_networkx(a), _to_networkx(b),
        node_match=lambda x, y: x["label"] == y["label"],
        edge_match=lambda x, y: x["roles"] == y["roles"],
    )
