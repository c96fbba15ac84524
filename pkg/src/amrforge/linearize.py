"""Flat token sequences with pointer tokens, as produced by seq2seq AMR parsers."""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .graph import AmrError, AmrGraph, Attribute, Edge
from .penman import walk

_POINTER_RE = re.compile(r"^<p(\d+)>$")


class LinearizationError(ValueError):
    """Token sequence could not be turned into a valid graph."""

    def __init__(self, message: str, repairs: list[str] | None = None):
        super().__init__(message)
        self.repairs = list(repairs or [])


def _encode_const(value: str) -> str:
    if value.startswith('"'):
        return value.replace("%", "%25").replace(" ", "%20").replace("\t", "%09").replace("\n", "%0A")
    return value


def _decode_const(token: str) -> str:
    if token.startswith('"'):
        return token.replace("%0A", "\n").replace("%09", "\t").replace("%20", " ").replace("%25", "%")
    return token


def is_pointer(token: str) -> bool:
    return bool(_POINTER_RE.match(token))


def linearize(g: AmrGraph) -> list[str]:
    """Depth-first token sequence; each variable becomes ``<pN>`` in first-visit order.

    >>> from amrforge.penman import parse_penman
    >>> linearize(parse_penman("(g / giraffe)"))
    ['(', '<p0>', 'giraffe', ')']
    """
    pointers: dict[str, str] = {}
    tokens: list[str] = []
    for event, val in walk(g):
        if event == "open":
            pointers[val] = f"<p{len(pointers)}>"
            tokens += ["(", pointers[val], g.concepts[val]]
        elif event == "close":
            tokens.append(")")
        elif event == "role":
            tokens.append(val)
        elif event == "ref":
            tokens.append(pointers[val])
        else:
            tokens.append(_encode_const(val))
    return tokens


@dataclass
class Delinearized:
    graph: AmrGraph
    repairs: list[str] = field(default_factory=list)


def delinearize(tokens: list[str]) -> Delinearized:
    """Rebuild a graph from tokens, applying at most two kinds of repair.

    Missing closing parentheses at the end are inserted, and a role with no
    target is dropped. Anything else (no root node, a pointer without a
    concept, an undefined pointer, trailing tokens after the root closes)
    raises :class:`LinearizationError` carrying the repair log so far.
    """
    tokens = list(tokens)
    repairs: list[str] = []
    if not tokens:
        raise LinearizationError("empty token sequence")
    if tokens[0] != "(":
        raise LinearizationError(f"sequence must open with '(', found {tokens[0]!r}")

    concepts: dict[str, str] = {}
    order: list[str] = []
    edges: list[Edge] = []
    attributes: list[Attribute] = []
    refs: list[tuple[int, str]] = []
    missing_parens = 0
    i = 0
    n = len(tokens)

    def var_of(pointer: str) -> str:
        return pointer[1:-1]

    def node() -> str:
        nonlocal i, missing_parens
        i += 1  # "("
        if i >= n or not is_pointer(tokens[i]):
            got = tokens[i] if i < n else "end of sequence"
            raise LinearizationError(f"expected a pointer token after '(', found {got!r}", repairs)
        var = var_of(tokens[i])
        if var in concepts:
            raise LinearizationError(f"pointer {tokens[i]} introduced twice", repairs)
        i += 1
        if i >= n or tokens[i] in ("(", ")") or tokens[i].startswith(":") or is_pointer(tokens[i]):
            raise LinearizationError(f"pointer <{var}> has no concept", repairs)
        concepts[var] = tokens[i]
        order.append(var)
        i += 1
        while True:
            if i >= n:
                missing_parens += 1
                return var
            tok = tokens[i]
            if tok == ")":
                i += 1
                return var
            if not tok.startswith(":") or len(tok) < 2:
                raise LinearizationError(f"expected a role or ')' at token {i}, found {tok!r}", repairs)
            role = tok
            i += 1
            nxt = tokens[i] if i < n else None
            if nxt is None or nxt == ")" or nxt.startswith(":"):
                repairs.append(f"dropped role {role} with no target at token {i - 1}")
                continue
            if nxt == "(":
                child = node()
                edges.append(Edge(var, role, child))
            elif is_pointer(nxt):
                refs.append((len(edges), nxt))
                edges.append(Edge(var, role, var_of(nxt)))
                i += 1
            else:
                attributes.append(Attribute(var, role, _decode_const(nxt)))
                i += 1

    root = node()
    if i < n:
        raise LinearizationError(f"trailing tokens after the root closes at token {i}", repairs)
    if missing_parens:
        repairs.append(f"inserted {missing_parens} ')' at end of sequence")
    for _, ptr in refs:
        if var_of(ptr) not in concepts:
            raise LinearizationError(f"pointer {ptr} is never introduced", repairs)
    try:
        graph = AmrGraph(variables=order, concepts=concepts, edges=edges, attributes=attributes, root=root)
    except AmrError as exc:
        raise LinearizationError(str(exc), repairs) from exc
    return Delinearized(graph, repairs)


def to_line(tokens: list[str]) -> str:
    return " ".join(tokens)


def from_line(line: str) -> list[str]:
    return line.split()
