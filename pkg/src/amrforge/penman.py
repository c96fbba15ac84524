"""PENMAN notation reader and writer.

Supports the subset that caption AMR corpora use: variables, concepts,
roles (including inverse ``-of`` roles), quoted strings, numbers, bare
symbols and ``#`` comment lines. Alignment markup (``~e.3``) is not supported.
"""

from __future__ import annotations

import re
from collections import defaultdict
from typing import Iterator

from .graph import AmrGraph, Attribute, Edge, invert_role, prefix_variables

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<lparen>\()
  | (?P<rparen>\))
  | (?P<slash>/)
  | (?P<role>:[^\s()"]*)
  | (?P<string>"(?:[^"\\]|\\.)*")
  | (?P<symbol>[^\s()/:"]+)
    """,
    re.VERBOSE,
)

# Undefined bare symbols that look like variable names are reported as dangling
# references instead of being read as constants.
_VARLIKE_RE = re.compile(r"^[a-z][0-9]*$")


class PenmanError(ValueError):
    """Syntax or reference error, annotated with the character offset."""

    def __init__(self, message: str, position: int | None = None):
        self.position = position
        if position is not None:
            message = f"{message} (at offset {position})"
        super().__init__(message)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise PenmanError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        if kind != "ws":
            tokens.append((kind, m.group(), pos))
        pos = m.end()
    return tokens


def split_comments(text: str) -> tuple[list[str], str]:
    comments, body = [], []
    for line in text.splitlines():
        if line.lstrip().startswith("#"):
            comments.append(line.strip())
        else:
            body.append(line)
    return comments, "\n".join(body)


def parse_penman(text: str, prefix: str = "") -> AmrGraph:
    """Parse a single PENMAN graph.

    ``prefix`` is prepended to every variable name, which keeps graphs from
    different sources apart when they are merged.

    >>> g = parse_penman("(a / and :op1 (b / boy) :op2 b)")
    >>> sorted(g.variables), len(g.edges)
    (['a', 'b'], 2)
    """
    comments, body = split_comments(text)
    # offsets are reported relative to the comment-stripped body
    tokens = _tokenize(body)
    if not tokens:
        raise PenmanError("empty input")

    concepts: dict[str, str] = {}
    order: list[str] = []
    # pending: (source, role, kind, value, pos); kind is "node" or "bare"
    pending: list = []
    i = 0

    def expect(kind: str) -> tuple[str, str, int]:
        nonlocal i
        if i >= len(tokens):
            raise PenmanError(f"unexpected end of input, expected {kind}", len(body))
        tok = tokens[i]
        if tok[0] != kind:
            raise PenmanError(f"expected {kind}, found {tok[1]!r}", tok[2])
        i += 1
        return tok

    def node() -> str:
        nonlocal i
        expect("lparen")
        _, var, vpos = expect("symbol")
        expect("slash")
        if i < len(tokens) and tokens[i][0] in ("symbol", "string"):
            concept = tokens[i][1]
            i += 1
        else:
            raise PenmanError("missing concept after '/'", tokens[i][2] if i < len(tokens) else len(body))
        if var in concepts:
            raise PenmanError(f"variable {var!r} is assigned a concept twice", vpos)
        concepts[var] = concept
        order.append(var)
        while True:
            if i >= len(tokens):
                raise PenmanError("unbalanced parentheses: missing ')'", len(body))
            kind, val, pos = tokens[i]
            if kind == "rparen":
                i += 1
                return var
            if kind != "role":
                raise PenmanError(f"expected a role or ')', found {val!r}", pos)
            if len(val) < 2:
                raise PenmanError("empty role label", pos)
            i += 1
            if i >= len(tokens):
                raise PenmanError(f"role {val} has no target", len(body))
            tkind, tval, tpos = tokens[i]
            if tkind == "lparen":
                # reserve the slot first so edges keep textual order
                slot = len(pending)
                pending.append(None)
                pending[slot] = (var, val, "node", node(), tpos)
            elif tkind == "symbol":
                i += 1
                pending.append((var, val, "bare", tval, tpos))
            elif tkind == "string":
                i += 1
                pending.append((var, val, "const", tval, tpos))
            else:
                raise PenmanError(f"role {val} has no target", tpos)

    root = node()
    if i != len(tokens):
        raise PenmanError(f"trailing content {tokens[i][1]!r} after graph", tokens[i][2])

    edges: list[Edge] = []
    attributes: list[Attribute] = []
    for src, role, kind, val, pos in pending:
        if kind == "node" or (kind == "bare" and val in concepts):
            edges.append(Edge(src, role, val))
        elif kind == "bare" and _VARLIKE_RE.match(val):
            raise PenmanError(f"reference to undefined variable {val!r}", pos)
        else:
            attributes.append(Attribute(src, role, val))

    g = AmrGraph(
        variables=order, concepts=concepts, edges=edges, attributes=attributes,
        root=root, metadata=comments,
    )
    if prefix:
        g = prefix_variables(g, prefix)
    return g


def iter_penman_blocks(text: str) -> Iterator[str]:
    """Yield blank-line-separated graph blocks (with their comment lines)."""
    block: list[str] = []
    for line in text.splitlines():
        if line.strip():
            block.append(line)
        elif block:
            yield "\n".join(block)
            block = []
    if block:
        yield "\n".join(block)


def parse_penman_file(path) -> list[AmrGraph]:
    with open(path, encoding="utf-8") as fh:
        return [parse_penman(b) for b in iter_penman_blocks(fh.read()) if split_comments(b)[1].strip()]


def walk(g: AmrGraph) -> Iterator[tuple]:
    """Depth-first traversal events shared by the PENMAN and token writers.

    Yields ``("open", var)``, ``("role", label)``, ``("ref", var)``,
    ``("const", value)`` and ``("close", var)``. Children follow stored edge
    order; an edge reached from its target carries the inverted role, and an
    edge owned by an enclosing node is left for that node to write.
    """
    incident: dict[str, list[int]] = defaultdict(list)
    for idx, (s, _, t) in enumerate(g.edges):
        incident[s].append(idx)
        if t != s:
            incident[t].append(idx)
    attrs: dict[str, list[Attribute]] = defaultdict(list)
    for a in g.attributes:
        attrs[a.source].append(a)

    visited: set[str] = set()
    open_nodes: set[str] = set()
    emitted: set[int] = set()

    def visit(v: str) -> Iterator[tuple]:
        visited.add(v)
        open_nodes.add(v)
        yield ("open", v)
        for idx in incident[v]:
            if idx in emitted:
                continue
            s, r, t = g.edges[idx]
            if s != v and s in open_nodes:
                continue
            emitted.add(idx)
            if s == v:
                role, other = r, t
            else:
                role, other = invert_role(r), s
            yield ("role", role)
            if other in visited:
                yield ("ref", other)
            else:
                yield from visit(other)
        for a in attrs[v]:
            yield ("role", a.role)
            yield ("const", a.value)
        open_nodes.discard(v)
        yield ("close", v)

    yield from visit(g.root)


def serialize_penman(g: AmrGraph, indent: int | None = 4, metadata: bool = True) -> str:
    """Write ``g`` as PENMAN; ``indent=None`` puts the graph on one line."""
    out: list[str] = []
    depth = -1
    for event, val in walk(g):
        if event == "open":
            depth += 1
            out.append(f"({val} / {g.concepts[val]}")
        elif event == "close":
            depth -= 1
            out.append(")")
        elif event == "role":
            pad = " " if indent is None else "\n" + " " * (indent * (depth + 1))
            out.append(f"{pad}{val} ")
        else:
            out.append(val)
    body = "".join(out)
    if metadata and g.metadata:
        return "\n".join([*g.metadata, body])
    return body
