import math
import random
from itertools import product

import pytest
from hypothesis import given, settings, strategies as st

from amrforge.lexicon import Lexicon
from amrforge.metrics import (
    OVERALL,
    CategoryCounts,
    count_matches,
    evaluate_pair,
    extract_ngrams,
    f_score,
    node_pr_by_category,
    score_against_references,
    sembleu,
    sembleu_details,
    smatch,
    smatch_oracle,
)
from amrforge.penman import parse_penman
from amrforge.synthetic import random_graph, random_pair

P = parse_penman
GIRAFFE = P("(s / stand-01 :ARG0 (g / giraffe))")
DOG = P("(s / stand-01 :ARG0 (d / dog))")


def test_f_score():
    assert f_score(0, 0) == 0
    assert f_score(0.5, 0.5) == 0.5


def test_hand_case():
    r = smatch(GIRAFFE, DOG)
    assert r.matched == 3 and r.test_triples == r.gold_triples == 4
    assert r.smatch_f1 == 0.75
    assert smatch_oracle(GIRAFFE, DOG).smatch_f1 == 0.75


def test_identity(caption_graphs):
    for g in caption_graphs:
        assert smatch(g, g).smatch_f1 == 1.0


def test_disjoint_concepts():
    a, b = P("(a / alpha :mod (b / beta))"), P("(c / gamma :part (d / delta))")
    assert smatch_oracle(a, b).matched == 0
    assert smatch(a, b).smatch_f1 == 0.0


def test_oracle_refuses_large_graphs():
    big = random_graph(random.Random(0), 12)
    with pytest.raises(ValueError):
        smatch_oracle(big, big)


def test_restarts_must_be_positive():
    with pytest.raises(ValueError):
        smatch(GIRAFFE, DOG, restarts=0)


def test_seed_reproducible():
    rng = random.Random(5)
    a, b = random_graph(rng, 12), random_graph(rng, 12)
    assert smatch(a, b, seed=7).mapping == smatch(a, b, seed=7).mapping


def brute_force_count(a, b):
    """Independent enumeration: every partial injective map of a's variables into b's."""
    targets = list(b.variables) + [None]
    best = 0
    for choice in product(targets, repeat=len(a.variables)):
        used = [t for t in choice if t is not None]
        if len(used) != len(set(used)):
            continue
        m = {v: t for v, t in zip(a.variables, choice) if t is not None}
        best = max(best, count_matches(a, b, m))
    return best


def test_count_matches_direct():
    assert count_matches(GIRAFFE, DOG, {"s": "s", "g": "d"}) == 3
    assert count_matches(GIRAFFE, DOG, {}) == 0


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32))
def test_hill_climb_bounded_by_oracle(seed):
    a, b = random_pair(random.Random(seed), max_vars=4)
    hc, oracle = smatch(a, b, seed=seed), smatch_oracle(a, b)
    assert hc.matched <= oracle.matched
    assert count_matches(a, b, hc.mapping) == hc.matched
    assert 0.0 <= hc.smatch_f1 <= 1.0


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32))
def test_oracle_matches_enumeration(seed):
    a, b = random_pair(random.Random(seed), max_vars=4)
    assert smatch_oracle(a, b).matched == brute_force_count(a, b)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32))
def test_smatch_symmetric_f1(seed):
    a, b = random_pair(random.Random(seed), max_vars=5)
    assert smatch_oracle(a, b).smatch_f1 == pytest.approx(smatch_oracle(b, a).smatch_f1, abs=1e-12)


def test_ngrams():
    assert extract_ngrams(P("(g / giraffe)"), 1) == {("giraffe",): 1}
    assert dict(extract_ngrams(GIRAFFE, 2)) == {("stand-01", ":ARG0", "giraffe"): 1}
    inv = P("(g / giraffe :ARG0-of (s / stand-01))")
    assert extract_ngrams(inv, 2) == extract_ngrams(GIRAFFE, 2)
    with pytest.raises(ValueError):
        extract_ngrams(GIRAFFE, 3)


def test_bigram_count_equals_edges(caption_graphs):
    for g in caption_graphs:
        assert sum(extract_ngrams(g, 2).values()) == len(g.edges)


def test_sembleu_identity_and_disjoint():
    assert sembleu(GIRAFFE, GIRAFFE, 1) == 1.0 and sembleu(GIRAFFE, GIRAFFE, 2) == 1.0
    assert sembleu(P("(a / alpha)"), P("(b / beta)"), 1) == 0.0


def test_sembleu_half_subgraph():
    ref = P("(s / stand-01 :ARG1 (g / giraffe) :location (f / field :mod (t / tall)))")
    pred = P("(s / stand-01 :ARG1 (g / giraffe))")
    d = sembleu_details(pred, ref, 1)
    assert d.precisions == {1: 1.0}
    assert d.score == pytest.approx(math.exp(-1), abs=1e-9)


def test_sembleu_bigram_skips_edgeless_order():
    g = P("(g / giraffe)")
    assert sembleu(g, g, 2) == 1.0


def test_evaluate_pair_report():
    r = evaluate_pair(GIRAFFE, DOG)
    assert r.smatch_f1 == 0.75
    assert 0 <= r.sembleu_2 <= r.sembleu_1 <= 1
    assert r.brevity_penalty == 1.0


def test_max_over_references():
    refs = [DOG, P("(a / alpha)"), GIRAFFE, P("(s / sit-01)")]
    for metric in ("smatch", "sembleu1", "sembleu2"):
        best = score_against_references(GIRAFFE, refs, metric)
        assert best.score == 1.0 and best.index == 2
        assert best.score == max(best.scores)


def test_single_reference_equals_metric():
    assert score_against_references(GIRAFFE, [DOG], "sembleu1").score == sembleu(GIRAFFE, DOG, 1)


def test_no_references():
    with pytest.raises(ValueError):
        score_against_references(GIRAFFE, [])


LEX = Lexicon(categories={"giraffe": "Animal", "dog": "Animal", "cat": "Animal", "man": "Person"})


def test_micro_pr_worked_example():
    out = node_pr_by_category([{"giraffe", "dog"}, set()], [{"giraffe"}, {"cat"}], LEX)
    animal = out["Animal"]
    assert (animal.tp, animal.fp, animal.fn) == (1, 1, 1)
    assert animal.precision == 0.5 and animal.recall == 0.5


def test_micro_pr_perfect_and_exclusion():
    gold = [{"giraffe", "man", "blorp"}, {"dog"}]
    out = node_pr_by_category(gold, gold, LEX)
    assert set(out) == {"Animal", "Person", OVERALL}
    assert all(c.precision == 1.0 and c.recall == 1.0 for c in out.values())
    assert out[OVERALL].tp == 3


def test_micro_pr_alignment():
    with pytest.raises(ValueError):
        node_pr_by_category([set()], [], LEX)
    assert CategoryCounts().precision == 0.0
