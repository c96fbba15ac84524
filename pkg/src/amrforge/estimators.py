"""scikit-learn style wrappers so the merge and linearization steps compose in pipelines."""

from __future__ import annotations

from collections.abc import Mapping

from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .graph import AmrGraph
from .lexicon import Lexicon, load_lexicon
from .linearize import delinearize, linearize
from .merge import CaptionAmrSet, MetaAmr, RelationWhitelist, build_meta_amr, load_whitelist
from .penman import parse_penman
from .stats import relation_histogram


def check_graph(g) -> AmrGraph:
    if isinstance(g, AmrGraph):
        return g
    if isinstance(g, str):
        return parse_penman(g)
    raise TypeError(f"expected an AmrGraph or PENMAN string, got {type(g).__name__}")


def check_graphs(X) -> list[AmrGraph]:
    if isinstance(X, (str, AmrGraph)):
        raise TypeError("expected a sequence of graphs, got a single graph")
    return [check_graph(g) for g in X]


def check_caption_sets(X) -> list[CaptionAmrSet]:
    """Accept caption sets, corpus records (``{"image_id", "amrs"}``) or plain lists of graphs."""
    if isinstance(X, (str, AmrGraph, CaptionAmrSet, Mapping)):
        raise TypeError("expected a sequence of caption sets")
    out = []
    for i, item in enumerate(X):
        if isinstance(item, CaptionAmrSet):
            out.append(item)
        elif isinstance(item, Mapping):
            out.append(CaptionAmrSet(str(item["image_id"]), tuple(check_graphs(item["amrs"]))))
        else:
            out.append(CaptionAmrSet(str(i), tuple(check_graphs(item))))
    return out


def _resolve_whitelist(wl) -> RelationWhitelist:
    if wl is None:
        return RelationWhitelist.default()
    if isinstance(wl, RelationWhitelist):
        return wl
    if isinstance(wl, str):
        return load_whitelist(wl)
    return RelationWhitelist(tuple(wl))


def _resolve_lexicon(lex) -> Lexicon:
    if lex is None:
        return Lexicon()
    if isinstance(lex, Lexicon):
        return lex
    return load_lexicon(lex)


class MetaAmrBuilder(BaseEstimator, TransformerMixin):
    """Turn per-image caption AMRs into meta-AMRs.

    Parameters
    ----------
    whitelist : RelationWhitelist, path, iterable of roles or None
        Roles kept during the edge merge. ``None`` uses the shipped default.
        Ignored when ``top_n`` is set.
    lexicon : Lexicon, path or None
        Hypernym table for refinement. ``None`` disables refinement.
    top_n : int or None
        When set, ``fit`` learns the whitelist as the ``top_n`` most frequent
        canonical roles of the training captions.
    """

    def __init__(self, whitelist=None, lexicon=None, top_n=None):
        self.whitelist = whitelist
        self.lexicon = lexicon
        self.top_n = top_n

    def fit(self, X, y=None):
        sets = check_caption_sets(X)
        if self.top_n is not None:
            table = relation_histogram((g for s in sets for g in s.graphs), top_n=self.top_n)
            self.whitelist_ = RelationWhitelist(tuple(r for r, _ in table))
        else:
            self.whitelist_ = _resolve_whitelist(self.whitelist)
        self.lexicon_ = _resolve_lexicon(self.lexicon)
        return self

    def transform(self, X) -> list[MetaAmr]:
        check_is_fitted(self, ["whitelist_", "lexicon_"])
        return [build_meta_amr(s, self.whitelist_, self.lexicon_) for s in check_caption_sets(X)]


class AmrLinearizer(BaseEstimator, TransformerMixin):
    """Graphs to pointer-token sequences and back. Stateless."""

    def __init__(self, join=False):
        self.join = join

    def fit(self, X=None, y=None):
        self.fitted_ = True
        return self

    def transform(self, X):
        seqs = [linearize(g) for g in check_graphs(X)]
        return [" ".join(s) for s in seqs] if self.join else seqs

    def inverse_transform(self, X) -> list[AmrGraph]:
        return [delinearize(s.split() if isinstance(s, str) else s).graph for s in X]
