import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError
from sklearn.pipeline import Pipeline

from amrforge.estimators import AmrLinearizer, MetaAmrBuilder, check_caption_sets, check_graphs
from amrforge.graph import is_isomorphic
from amrforge.lexicon import Lexicon, load_lexicon
from amrforge.merge import CaptionAmrSet, RelationWhitelist, build_meta_amr


def test_params_round_trip():
    b = MetaAmrBuilder(top_n=5)
    assert b.get_params() == {"whitelist": None, "lexicon": None, "top_n": 5}
    assert clone(b).set_params(top_n=3).top_n == 3


def test_transform_requires_fit(caption_graphs):
    with pytest.raises(NotFittedError):
        MetaAmrBuilder().transform([caption_graphs])


def test_builder_matches_function(caption_graphs, corpus_record):
    lex = load_lexicon()
    metas = MetaAmrBuilder(lexicon=lex).fit_transform([corpus_record])
    direct = build_meta_amr(CaptionAmrSet("giraffes", caption_graphs), RelationWhitelist.default(), lex)
    assert metas[0].image_id == "giraffes"
    assert is_isomorphic(metas[0].graph, direct.graph)


def test_builder_learns_whitelist(caption_graphs):
    b = MetaAmrBuilder(top_n=3).fit([caption_graphs])
    assert b.whitelist_.roles == (":location", ":ARG1", ":mod")
    assert b.lexicon_ == Lexicon()


def test_validation_helpers(caption_texts):
    assert len(check_graphs(caption_texts)) == 5
    with pytest.raises(TypeError):
        check_graphs(caption_texts[0])
    with pytest.raises(TypeError):
        check_caption_sets({"image_id": "x", "amrs": caption_texts})
    with pytest.raises(TypeError):
        check_graphs([42])
    assert check_caption_sets([caption_texts])[0].k == 5


def test_linearizer_pipeline(caption_graphs):
    lin = AmrLinearizer(join=True).fit()
    lines = lin.transform(caption_graphs)
    assert all(isinstance(s, str) for s in lines)
    back = lin.inverse_transform(lines)
    assert all(is_isomorphic(a, b) for a, b in zip(back, caption_graphs))


def test_builder_in_pipeline(corpus_record):
    pipe = Pipeline([("merge", MetaAmrBuilder(lexicon=load_lexicon()))])
    metas = pipe.fit_transform([corpus_record])
    assert metas[0].refinement_log == [("rock", "stone"), ("leaf", "foliage")]
