"""Random graphs and synthetic corpora for property tests and benchmarks."""

from __future__ import annotations

import random
from dataclasses import dataclass

from .graph import AmrGraph, Attribute, Edge, rename_variables
from .lexicon import Lexicon
from .merge import DEFAULT_ROLES, CaptionAmrSet

CONCEPTS = (
    "giraffe", "dog", "man", "woman", "field", "grass", "tree", "table", "car", "street",
    "stand-01", "walk-01", "eat-01", "hold-01", "sit-01", "near-02", "and", "person", "tall", "white",
)
ROLES = (":ARG0", ":ARG1", ":ARG2", ":mod", ":location", ":op1", ":op2", ":time", ":part", ":poss")
ATTRIBUTES = ((":quant", "2"), (":quant", "3"), (":polarity", "-"), (":name", '"Big Ben"'), (":value", '"50%"'))


def random_graph(
    rng: random.Random,
    n_nodes: int,
    concepts=CONCEPTS,
    roles=ROLES,
    extra_edge_rate: float = 0.2,
    attribute_rate: float = 0.15,
    inverse_rate: float = 0.2,
) -> AmrGraph:
    """Connected random graph: a random spanning tree plus re-entrant edges."""
    vs = [f"x{i}" for i in range(n_nodes)]
    concept_of = {v: rng.choice(concepts) for v in vs}
    edges = []
    for i in range(1, n_nodes):
        parent, child = vs[rng.randrange(i)], vs[i]
        role = rng.choice(roles)
        roll = rng.random()
        if roll < inverse_rate:
            edges.append(Edge(child, role + "-of", parent))
        elif roll < inverse_rate * 1.5:
            edges.append(Edge(child, role, parent))
        else:
            edges.append(Edge(parent, role, child))
    for _ in range(int(extra_edge_rate * n_nodes)):
        if n_nodes < 2:
            break
        s, t = rng.sample(vs, 2)
        edges.append(Edge(s, rng.choice(roles), t))
    attributes = [Attribute(v, *rng.choice(ATTRIBUTES)) for v in vs if rng.random() < attribute_rate]
    return AmrGraph(variables=vs, concepts=concept_of, edges=edges, attributes=attributes, root=vs[0])


def perturb(rng: random.Random, g: AmrGraph, concepts=CONCEPTS, roles=ROLES) -> AmrGraph:
    """A nearby graph: a few concepts, roles or re-entrant edges changed, variables renamed."""
    concept_of = dict(g.concepts)
    edges = list(g.edges)
    for _ in range(rng.randint(0, 2)):
        v = rng.choice(g.variables)
        concept_of[v] = rng.choice(concepts)
    if edges and rng.random() < 0.5:
        i = rng.randrange(len(edges))
        s, _, t = edges[i]
        edges[i] = Edge(s, rng.choice(roles), t)
    if len(g.variables) > 1 and rng.random() < 0.4:
        s, t = rng.sample(list(g.variables), 2)
        edges.append(Edge(s, rng.choice(roles), t))
    if rng.random() < 0.3 and len(g.variables) > 1:
        # drop the last node if it is a leaf so sizes differ
        last = g.variables[-1]
        touching = [e for e in edges if last in (e.source, e.target)]
        if len(touching) == 1 and last != g.root:
            edges.remove(touching[0])
            concept_of.pop(last)
            h = AmrGraph(
                variables=g.variables[:-1], concepts=concept_of, edges=edges,
                attributes=[a for a in g.attributes if a.source != last], root=g.root,
            )
            return _shuffle_names(rng, h)
    h = AmrGraph(variables=g.variables, concepts=concept_of, edges=edges, attributes=g.attributes, root=g.root)
    return _shuffle_names(rng, h)


def _shuffle_names(rng: random.Random, g: AmrGraph) -> AmrGraph:
    names = [f"y{i}" for i in range(len(g.variables))]
    rng.shuffle(names)
    return rename_variables(g, dict(zip(g.variables, names)))


def random_pair(rng: random.Random, max_vars: int = 6) -> tuple[AmrGraph, AmrGraph]:
    a = random_graph(rng, rng.randint(1, max_vars))
    if rng.random() < 0.8:
        return a, perturb(rng, a)
    return a, random_graph(rng, rng.randint(1, max_vars))


def zipf_corpus(rng: random.Random, n_graphs: int, roles, exponent: float = 1.1, nodes=(4, 12)) -> list[AmrGraph]:
    """Graphs whose edge roles follow a Zipf law over ``roles`` (first = most frequent)."""
    weights = [1 / (i + 1) ** exponent for i in range(len(roles))]
    out = []
    for _ in range(n_graphs):
        n = rng.randint(*nodes)
        vs = [f"x{i}" for i in range(n)]
        edges = [Edge(vs[rng.randrange(i)], rng.choices(roles, weights)[0], vs[i]) for i in range(1, n)]
        out.append(AmrGraph(vs, {v: rng.choice(CONCEPTS) for v in vs}, edges, (), vs[0]))
    return out


@dataclass
class RefinementCorpus:
    images: list[CaptionAmrSet]
    lexicon: Lexicon
    nouns: list[str]
    predicates: list[str]
    mapped: dict[str, str]


def refinement_corpus(
    rng: random.Random,
    n_images: int = 1000,
    k: int = 5,
    n_nouns: int = 300,
    n_predicates: int = 15,
    mapped_fraction: float = 0.3,
    hyponyms_per_hypernym: int = 3,
) -> RefinementCorpus:
    """Five-caption images over a vocabulary where a fixed share of nouns has a hypernym.

    Hypernyms are drawn from the unmapped nouns, so every mapped noun type
    disappears after refinement and no new type appears. Scenes mix sibling
    hyponyms so that refinement also merges nodes within images.
    """
    nouns = [f"thing{i:03d}" for i in range(n_nouns)]
    predicates = [f"act{i:02d}-01" for i in range(n_predicates)]
    order = nouns[:]
    rng.shuffle(order)
    n_mapped = round(mapped_fraction * n_nouns)
    mapped_nouns = order[:n_mapped]
    targets = order[n_mapped:n_mapped + max(1, n_mapped // hyponyms_per_hypernym)]
    mapped = {m: targets[i % len(targets)] for i, m in enumerate(mapped_nouns)}
    groups: dict[str, list[str]] = {}
    for m, h in mapped.items():
        groups.setdefault(h, [h]).append(m)
    group_list = list(groups.values())
    roles = [r for r in DEFAULT_ROLES if r not in (":op1", ":op2", ":op3", ":op4")]

    images = []
    for idx in range(n_images):
        scene_nouns = set(rng.sample(nouns, 5))
        for grp in rng.sample(group_list, 2):
            scene_nouns.update(rng.sample(grp, 2))
        scene_nouns = sorted(scene_nouns)
        scene_preds = rng.sample(predicates, 2)
        graphs = []
        for _ in range(k):
            chosen = [rng.choice(scene_preds)] + rng.sample(scene_nouns, rng.randint(3, min(6, len(scene_nouns))))
            vs = [f"v{i}" for i in range(len(chosen))]
            edges = []
            for i in range(1, len(vs)):
                role = rng.choice(roles) if rng.random() < 0.9 else ":beside"
                edges.append(Edge(vs[rng.randrange(i)], role, vs[i]))
            if len(vs) > 3 and rng.random() < 0.5:
                s, t = rng.sample(vs, 2)
                edges.append(Edge(s, rng.choice(roles), t))
            graphs.append(AmrGraph(vs, dict(zip(vs, chosen)), edges, (), vs[0]))
        images.append(CaptionAmrSet(f"img{idx:04d}", graphs))
    return RefinementCorpus(images, Lexicon(hypernyms=mapped), nouns, predicates, mapped)
