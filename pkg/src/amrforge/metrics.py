"""Smatch, SemBleu-1/2 and per-category node precision/recall."""

from __future__ import annotations

import hashlib
import itertools
import math
import random
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import Callable, Sequence

from .graph import AmrGraph, canonicalize_edges, triples
from .lexicon import Lexicon

ORACLE_MAX_VARIABLES = 8
ORACLE_MAX_MAPPINGS = 2_000_000


def f_score(precision: float, recall: float) -> float:
    if precision + recall == 0:
        return 0.0
    return 2 * precision * recall / (precision + recall)


@dataclass
class ScoreReport:
    smatch_precision: float | None = None
    smatch_recall: float | None = None
    smatch_f1: float | None = None
    matched: int | None = None
    test_triples: int | None = None
    gold_triples: int | None = None
    mapping: dict[str, str | None] = field(default_factory=dict)
    sembleu_1: float | None = None
    sembleu_2: float | None = None
    ngram_precisions: dict[int, float] = field(default_factory=dict)
    brevity_penalty: float | None = None


# -- Smatch ---------------------------------------------------------------


class _MatchTables:
    """Per-variable and per-variable-pair match counts between two graphs.

    With an injective mapping, the number of matched triples decomposes into
    terms over single variables (instances, attributes, the root triple,
    self-loops) and over ordered pairs of distinct variables (relations).
    """

    def __init__(self, a: AmrGraph, b: AmrGraph):
        self.a_vars = list(a.variables)
        self.b_vars = list(b.variables)
        ua, pa = self._index(a)
        ub, pb = self._index(b)
        self.unary: dict[str, dict[str, int]] = {}
        for x, labels in ua.items():
            row = {}
            for y, blabels in ub.items():
                w = sum(min(n, blabels[lab]) for lab, n in labels.items() if lab in blabels)
                if w:
                    row[y] = w
            self.unary[x] = row
        b_by_roles = defaultdict(list)
        for key, roles in pb.items():
            for r in roles:
                b_by_roles[r].append(key)
        self.pair: dict[tuple[str, str], dict[tuple[str, str], int]] = {}
        self.pairs_of: dict[str, list[tuple[str, str]]] = defaultdict(list)
        for key, roles in pa.items():
            row: dict[tuple[str, str], int] = defaultdict(int)
            for r, n in roles.items():
                for bkey in b_by_roles[r]:
                    row[bkey] += min(n, pb[bkey][r])
            if row:
                self.pair[key] = dict(row)
                self.pairs_of[key[0]].append(key)
                self.pairs_of[key[1]].append(key)
        self.size_a = len(triples(a))
        self.size_b = len(triples(b))

    @staticmethod
    def _index(g: AmrGraph):
        t = triples(g)
        unary: dict[str, Counter] = {v: Counter() for v in g.variables}
        pairs: dict[tuple[str, str], Counter] = defaultdict(Counter)
        for v, _, c in t.instances:
            unary[v][("instance", c)] += 1
        for v, r, val in t.attributes:
            unary[v][(r, val)] += 1
        root, r, c = t.top
        unary[root][(r, c)] += 1
        for s, r, tt in t.relations:
            if s == tt:
                unary[s][("self", r)] += 1
            else:
                pairs[(s, tt)][r] += 1
        return unary, pairs

    def score(self, m: dict[str, str | None]) -> int:
        total = 0
        for x, y in m.items():
            if y is not None:
                total += self.unary[x].get(y, 0)
        for (x1, x2), row in self.pair.items():
            y1, y2 = m[x1], m[x2]
            if y1 is not None and y2 is not None:
                total += row.get((y1, y2), 0)
        return total

    def local(self, m: dict[str, str | None], xs: Sequence[str]) -> int:
        total = 0
        keys = set()
        for x in xs:
            y = m[x]
            if y is not None:
                total += self.unary[x].get(y, 0)
            keys.update(self.pairs_of.get(x, ()))
        for x1, x2 in keys:
            y1, y2 = m[x1], m[x2]
            if y1 is not None and y2 is not None:
                total += self.pair[(x1, x2)].get((y1, y2), 0)
        return total


def _smart_mapping(t: _MatchTables) -> dict[str, str | None]:
    candidates = sorted(
        ((-w, ia, ib, x, y)
         for ia, x in enumerate(t.a_vars)
         for ib, y in enumerate(t.b_vars)
         if (w := t.unary[x].get(y, 0)) > 0),
    )
    m: dict[str, str | None] = {}
    used: set[str] = set()
    for _, _, _, x, y in candidates:
        if x not in m and y not in used:
            m[x] = y
            used.add(y)
    free = [y for y in t.b_vars if y not in used]
    for x in t.a_vars:
        if x not in m:
            m[x] = free.pop(0) if free else None
    return m


def _random_mapping(t: _MatchTables, rng: random.Random) -> dict[str, str | None]:
    ys: list[str | None] = list(t.b_vars)
    rng.shuffle(ys)
    ys += [None] * max(0, len(t.a_vars) - len(ys))
    return dict(zip(t.a_vars, ys))


def _hill_climb(t: _MatchTables, m: dict[str, str | None]) -> tuple[int, dict[str, str | None]]:
    """Steepest ascent over single reassignments and pairwise swaps."""
    m = dict(m)
    score = t.score(m)
    while True:
        used = {y for y in m.values() if y is not None}
        free = [y for y in t.b_vars if y not in used]
        best_gain, best_move = 0, None
        for x in t.a_vars:
            old = m[x]
            before = t.local(m, (x,))
            for y in free:
                m[x] = y
                gain = t.local(m, (x,)) - before
                if gain > best_gain:
                    best_gain, best_move = gain, ((x, y),)
            m[x] = old
        for i, x1 in enumerate(t.a_vars):
            for x2 in t.a_vars[i + 1:]:
                y1, y2 = m[x1], m[x2]
                if y1 == y2:
                    continue
                before = t.local(m, (x1, x2))
                m[x1], m[x2] = y2, y1
                gain = t.local(m, (x1, x2)) - before
                m[x1], m[x2] = y1, y2
                if gain > best_gain:
                    best_gain, best_move = gain, ((x1, y2), (x2, y1))
        if best_move is None:
            return score, m
        for x, y in best_move:
            m[x] = y
        score += best_gain


def _report(matched: int, size_a: int, size_b: int, mapping) -> ScoreReport:
    p = matched / size_a
    r = matched / size_b
    return ScoreReport(
        smatch_precision=p, smatch_recall=r, smatch_f1=f_score(p, r),
        matched=matched, test_triples=size_a, gold_triples=size_b, mapping=dict(mapping),
    )


def smatch(a: AmrGraph, b: AmrGraph, restarts: int = 4, seed: int | None = 0) -> ScoreReport:
    """Smatch of test graph ``a`` against gold graph ``b``.

    The first start is a greedy concept-matching seed; the remaining
    ``restarts - 1`` are random injective mappings drawn from ``seed``.
    Precision is over the triples of ``a``, recall over those of ``b``.
    """
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    t = _MatchTables(a, b)
    rng = random.Random(seed)
    best_score, best_map = _hill_climb(t, _smart_mapping(t))
    for _ in range(restarts - 1):
        score, m = _hill_climb(t, _random_mapping(t, rng))
        if score > best_score:
            best_score, best_map = score, m
    return _report(best_score, t.size_a, t.size_b, best_map)


def count_matches(a: AmrGraph, b: AmrGraph, mapping: dict[str, str | None]) -> int:
    """Matched triples under ``mapping``: rename ``a`` and intersect triple multisets."""
    ta = triples(a)
    m = {x: y for x, y in mapping.items() if y is not None}
    cand = Counter()
    for s, r, o in (*ta.instances, *ta.attributes, ta.top):
        if s in m:
            cand[(m[s], r, o)] += 1
    for s, r, o in ta.relations:
        if s in m and o in m:
            cand[(m[s], r, m[o])] += 1
    return sum((cand & Counter(triples(b).all())).values())


def smatch_oracle(a: AmrGraph, b: AmrGraph, max_mappings: int = ORACLE_MAX_MAPPINGS) -> ScoreReport:
    """Exact Smatch by enumerating every injective variable mapping.

    Refuses graphs where the smaller side has more than eight variables or
    where the enumeration would exceed ``max_mappings`` mappings.
    """
    na, nb = a.num_nodes, b.num_nodes
    small, large = min(na, nb), max(na, nb)
    if small > ORACLE_MAX_VARIABLES:
        raise ValueError(f"oracle limited to {ORACLE_MAX_VARIABLES} variables on the smaller graph, got {small}")
    count = math.perm(large, small)
    if count > max_mappings:
        raise ValueError(f"oracle would enumerate {count} mappings (limit {max_mappings})")

    ta, tb = triples(a), triples(b)
    gold = Counter(tb.all())
    a_unary = [*ta.instances, *ta.attributes, ta.top]

    def matched(m: dict[str, str]) -> int:
        cand = Counter()
        for s, r, o in a_unary:
            if s in m:
                cand[(m[s], r, o)] += 1
        for s, r, o in ta.relations:
            if s in m and o in m:
                cand[(m[s], r, m[o])] += 1
        return sum((cand & gold).values())

    best, best_map = -1, {}
    if na <= nb:
        for perm in itertools.permutations(b.variables, na):
            m = dict(zip(a.variables, perm))
            s = matched(m)
            if s > best:
                best, best_map = s, m
    else:
        for perm in itertools.permutations(a.variables, nb):
            m = dict(zip(perm, b.variables))
            s = matched(m)
            if s > best:
                best, best_map = s, m
    full_map: dict[str, str | None] = {x: best_map.get(x) for x in a.variables}
    return _report(best, len(ta), len(tb), full_map)


# -- SemBleu --------------------------------------------------------------


def extract_ngrams(g: AmrGraph, k: int) -> Counter:
    """Order-1 grams are concepts; order-2 grams are (source, role, target) over canonical edges."""
    if k == 1:
        return Counter((c,) for c in (g.concepts[v] for v in g.variables))
    if k == 2:
        cg = canonicalize_edges(g)
        return Counter((cg.concepts[s], r, cg.concepts[t]) for s, r, t in cg.edges)
    raise ValueError(f"unsupported n-gram order {k}; use 1 or 2")


@dataclass
class SemBleuResult:
    score: float
    precisions: dict[int, float]
    brevity_penalty: float
    empty_prediction: bool = False


def sembleu_details(pred: AmrGraph, ref: AmrGraph, max_k: int = 2) -> SemBleuResult:
    """Clipped n-gram precisions, uniform geometric mean and brevity penalty.

    An order where neither graph has n-grams is left out of the mean. The
    brevity penalty compares total n-gram counts over all orders used.
    """
    if max_k not in (1, 2):
        raise ValueError(f"unsupported SemBleu order {max_k}; use 1 or 2")
    precisions: dict[int, float] = {}
    pred_total = ref_total = 0
    for k in range(1, max_k + 1):
        pg, rg = extract_ngrams(pred, k), extract_ngrams(ref, k)
        np_, nr = sum(pg.values()), sum(rg.values())
        pred_total += np_
        ref_total += nr
        if np_ == 0 and nr == 0:
            continue
        precisions[k] = sum((pg & rg).values()) / np_ if np_ else 0.0
    if pred_total == 0:
        return SemBleuResult(0.0, precisions, 0.0, empty_prediction=True)
    bp = math.exp(min(0.0, 1.0 - ref_total / pred_total))
    if any(p == 0 for p in precisions.values()):
        return SemBleuResult(0.0, precisions, bp)
    geo = math.exp(sum(math.log(p) for p in precisions.values()) / len(precisions))
    return SemBleuResult(bp * geo, precisions, bp)


def sembleu(pred: AmrGraph, ref: AmrGraph, max_k: int = 2) -> float:
    return sembleu_details(pred, ref, max_k).score


# -- corpus protocol ------------------------------------------------------


def pair_seed(seed: int, *parts: str) -> int:
    """Derive a per-pair RNG seed from the master seed and the pair's content."""
    h = hashlib.sha256(str(seed).encode())
    for p in parts:
        h.update(b"\x1f")
        h.update(p.encode("utf-8"))
    return int.from_bytes(h.digest()[:8], "big")


def metric_function(name: str, restarts: int = 4, seed: int = 0) -> Callable[[AmrGraph, AmrGraph], float]:
    """Look up ``smatch``, ``sembleu1`` or ``sembleu2`` as a ``(pred, ref) -> float`` callable."""
    from .penman import serialize_penman

    if name == "smatch":
        def fn(pred, ref):
            s = pair_seed(seed, serialize_penman(pred, indent=None), serialize_penman(ref, indent=None))
            return smatch(pred, ref, restarts=restarts, seed=s).smatch_f1
        return fn
    if name == "sembleu1":
        return lambda pred, ref: sembleu(pred, ref, 1)
    if name == "sembleu2":
        return lambda pred, ref: sembleu(pred, ref, 2)
    raise ValueError(f"unknown metric {name!r}")


@dataclass
class BestReference:
    score: float
    index: int
    scores: list[float]


def score_against_references(pred: AmrGraph, refs: Sequence[AmrGraph], metric="smatch", **kwargs) -> BestReference:
    """Maximum of ``metric(pred, ref)`` over ``refs``; ties go to the earliest reference."""
    if not refs:
        raise ValueError("at least one reference graph is required")
    fn = metric_function(metric, **kwargs) if isinstance(metric, str) else metric
    scores = [fn(pred, r) for r in refs]
    best = max(range(len(scores)), key=lambda i: (scores[i], -i))
    return BestReference(scores[best], best, scores)


def evaluate_pair(pred: AmrGraph, ref: AmrGraph, restarts: int = 4, seed: int = 0) -> ScoreReport:
    report = smatch(pred, ref, restarts=restarts, seed=seed)
    s1 = sembleu_details(pred, ref, 1)
    s2 = sembleu_details(pred, ref, 2)
    report.sembleu_1 = s1.score
    report.sembleu_2 = s2.score
    report.ngram_precisions = s2.precisions
    report.brevity_penalty = s2.brevity_penalty
    return report


# -- per-category node P/R -----------------------------------------------


@dataclass
class CategoryCounts:
    tp: int = 0
    fp: int = 0
    fn: int = 0

    @property
    def precision(self) -> float:
        return self.tp / (self.tp + self.fp) if self.tp + self.fp else 0.0

    @property
    def recall(self) -> float:
        return self.tp / (self.tp + self.fn) if self.tp + self.fn else 0.0


OVERALL = "Overall"


def node_pr_by_category(
    pred_nodes: Sequence[set[str]],
    gold_nodes: Sequence[set[str]],
    lexicon: Lexicon,
) -> dict[str, CategoryCounts]:
    """Micro-averaged node precision/recall per category, plus an ``Overall`` row.

    Per image, nodes are compared as sets restricted to each category's
    concepts; counts are summed over images before dividing. Concepts the
    lexicon cannot categorize are ignored.
    """
    if len(pred_nodes) != len(gold_nodes):
        raise ValueError("prediction and gold node lists are not aligned")
    out: dict[str, CategoryCounts] = defaultdict(CategoryCounts)
    for pred, gold in zip(pred_nodes, gold_nodes):
        pred, gold = set(pred), set(gold)
        for c in pred | gold:
            cat = lexicon.category(c)
            if cat is None:
                continue
            for key in (cat, OVERALL):
                counts = out[key]
                if c in pred and c in gold:
                    counts.tp += 1
                elif c in pred:
                    counts.fp += 1
                else:
                    counts.fn += 1
    return dict(out)
