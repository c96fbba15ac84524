"""Flat lexical tables standing in for WordNet: hypernyms and category labels.

The TSV format has one entry per line::

    salmon<TAB>fish              # hypernym
    mouse<TAB>CAT:Artifact       # entity/relation category
    :location<TAB>CAT:Geometric  # role category

Blank lines and ``#`` comments are ignored.
"""

from __future__ import annotations

import os
import warnings
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .graph import canonical_role, is_predicate

ENTITY_CATEGORIES = (
    "Artifact", "Part", "Location", "Person", "Flora/Nature", "Clothing",
    "Food", "Animal", "Vehicle", "Furniture", "Structure", "Building",
)
RELATION_CATEGORIES = (
    "Geometric", "Possessive", "Semantic", "Attribute Color", "Attribute",
    "AMR specific", "Quantifier", "Event", "Misc",
)
TAXONOMY = frozenset(ENTITY_CATEGORIES + RELATION_CATEGORIES)

ENV_VAR = "AMRFORGE_LEXICON"


class LexiconError(ValueError):
    pass


@dataclass(frozen=True)
class Lexicon:
    hypernyms: dict[str, str] = field(default_factory=dict)
    categories: dict[str, str] = field(default_factory=dict)
    role_categories: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        for label in (*self.categories.values(), *self.role_categories.values()):
            if label not in TAXONOMY:
                raise LexiconError(f"unknown category label {label!r}")
        _check_acyclic(self.hypernyms)

    def hypernym(self, concept: str) -> str | None:
        """One-hop replacement for a non-predicate concept, if any."""
        if is_predicate(concept):
            return None
        return self.hypernyms.get(concept)

    def category(self, concept: str) -> str | None:
        if concept in self.categories:
            return self.categories[concept]
        if is_predicate(concept):
            # eat-01 falls back to the lemma entry
            return self.categories.get(concept.rsplit("-", 1)[0])
        return None

    def role_category(self, role: str) -> str | None:
        return self.role_categories.get(canonical_role(role))

    def __len__(self):
        return len(self.hypernyms) + len(self.categories) + len(self.role_categories)


def _check_acyclic(hypernyms: dict[str, str]):
    done: set[str] = set()
    for start in hypernyms:
        path = []
        on_path = set()
        cur = start
        while cur in hypernyms and cur not in done:
            if cur in on_path:
                cycle = path[path.index(cur):] + [cur]
                raise LexiconError("hypernym cycle: " + " -> ".join(cycle))
            path.append(cur)
            on_path.add(cur)
            cur = hypernyms[cur]
        done.update(path)


def parse_lexicon(text: str, source: str = "<string>") -> Lexicon:
    hyp: dict[str, str] = {}
    cats: dict[str, str] = {}
    role_cats: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != 2 or not parts[0].strip() or not parts[1].strip():
            raise LexiconError(f"{source}:{lineno}: expected 'concept<TAB>value', got {raw!r}")
        key, value = parts[0].strip(), parts[1].strip()
        if value.startswith("CAT:"):
            label = value[4:]
            if label not in TAXONOMY:
                raise LexiconError(f"{source}:{lineno}: unknown category label {label!r}")
            table = role_cats if key.startswith(":") else cats
        else:
            if key.startswith(":"):
                raise LexiconError(f"{source}:{lineno}: roles take categories, not hypernyms")
            label, table = value, hyp
        if key in table and table[key] != label:
            warnings.warn(f"{source}:{lineno}: duplicate entry for {key!r}; last one wins", stacklevel=2)
        table[key] = label
    return Lexicon(hyp, cats, role_cats)


def load_lexicon(path: str | os.PathLike | None = None) -> Lexicon:
    """Load a lexicon TSV; ``None`` means ``$AMRFORGE_LEXICON`` or the shipped sample."""
    if path is None:
        path = os.environ.get(ENV_VAR)
    if path is None:
        text = resources.files("amrforge.data").joinpath("lexicon.tsv").read_text(encoding="utf-8")
        return parse_lexicon(text, "lexicon.tsv")
    return parse_lexicon(Path(path).read_text(encoding="utf-8"), str(path))


def empty_lexicon() -> Lexicon:
    return Lexicon()
