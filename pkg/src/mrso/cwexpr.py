"""Clique-width k-expressions: AST, text syntax and graph semantics.

Syntax (whitespace-insensitive)::

    expr := 'v' '(' INT ',' INT ')'             vertex_id, label
          | 'u' '(' expr ',' expr ')'           disjoint union
          | 'rho' '(' INT '->' INT ',' expr ')' relabel a -> b
          | 'eta' '(' INT ',' INT ',' expr ')'  join labels a and b

Leaves carry an explicit vertex id so they can be bound to codons.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterator, Union as _U

from .errors import ExpressionSyntaxError, InvalidExpression

__all__ = [
    "Leaf",
    "Union",
    "Relabel",
    "AddEdges",
    "CwExpression",
    "LabeledGraph",
    "parse_expression",
    "format_expression",
    "evaluate",
    "width",
    "validate_against",
    "postorder",
    "leaves",
    "check_expression",
    "label_buckets",
]


@dataclass(frozen=True)
class Leaf:
    vertex: int
    label: int


@dataclass(frozen=True)
class Union:
    left: "CwExpression"
    right: "CwExpression"


@dataclass(frozen=True)
class Relabel:
    source: int
    target: int
    child: "CwExpression"


@dataclass(frozen=True)
class AddEdges:
    a: int
    b: int
    child: "CwExpression"


CwExpression = _U[Leaf, Union, Relabel, AddEdges]


def children(node: CwExpression) -> tuple:
    if isinstance(node, Leaf):
        return ()
    if isinstance(node, Union):
        return (node.left, node.right)
    return (node.child,)


def postorder(expr: CwExpression) -> Iterator[CwExpression]:
    """Yield every node after all of its descendants (no recursion)."""
    stack = [(expr, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded or isinstance(node, Leaf):
            yield node
            continue
        stack.append((node, True))
        for child in reversed(children(node)):
            stack.append((child, False))


def leaves(expr: CwExpression) -> list[Leaf]:
    return [node for node in postorder(expr) if isinstance(node, Leaf)]


def check_expression(expr: CwExpression) -> None:
    """Raise InvalidExpression unless leaves are disjoint and labels are legal."""
    seen: set[int] = set()
    for node in postorder(expr):
        if isinstance(node, Leaf):
            if node.vertex < 1:
                raise InvalidExpression(f"vertex id must be positive, got {node.vertex}")
            if node.label < 1:
                raise InvalidExpression(f"label must be >= 1, got {node.label}")
            if node.vertex in seen:
                raise InvalidExpression(f"duplicate vertex id {node.vertex}")
            seen.add(node.vertex)
        elif isinstance(node, (Relabel, AddEdges)):
            a, b = (node.source, node.target) if isinstance(node, Relabel) else (node.a, node.b)
            if a < 1 or b < 1:
                raise InvalidExpression(f"label must be >= 1, got {min(a, b)}")
            if a == b:
                kind = "rho" if isinstance(node, Relabel) else "eta"
                raise InvalidExpression(f"{kind} needs two distinct labels, got {a} and {b}")


# ---------------------------------------------------------------- parsing

_TOKEN = re.compile(r"\s*(?:(?P<int>\d+)|(?P<word>[A-Za-z]+)|(?P<arrow>->)|(?P<punct>[(),]))")
_ARITY = {"v": ("int", "int"), "u": ("expr", "expr"), "rho": ("int", "arrow_int", "expr"), "eta": ("int", "int", "expr")}


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if m is None:
            bad = pos + (len(text[pos:]) - len(text[pos:].lstrip()))
            raise ExpressionSyntaxError(f"unexpected character {text[bad]!r}", bad)
        kind = m.lastgroup
        tokens.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    tokens.append(("eof", "", len(text)))
    return tokens


def parse_expression(text: str) -> CwExpression:
    """Parse the keyword syntax into an AST and check k-expression rules."""
    tokens = _tokenize(text)
    i = 0

    def take(kind: str, value: str | None = None) -> tuple[str, str, int]:
        nonlocal i
        tok = tokens[i]
        if tok[0] != kind or (value is not None and tok[1] != value):
            want = repr(value) if value is not None else kind
            got = "end of input" if tok[0] == "eof" else repr(tok[1])
            raise ExpressionSyntaxError(f"expected {want}, found {got}", tok[2])
        i += 1
        return tok

    # Explicit stack of partially parsed operators: [keyword, position, collected args].
    stack: list[list] = []
    result = None
    while True:
        tok = take("word")
        keyword = tok[1]
        if keyword not in _ARITY:
            raise ExpressionSyntaxError(f"unknown operator {keyword!r}", tok[2])
        take("punct", "(")
        frame = [keyword, tok[2], []]
        stack.append(frame)
        # Consume leading integer arguments until the frame needs a subexpression.
        while True:
            frame = stack[-1]
            slots = _ARITY[frame[0]]
            done = len(frame[2])
            if done == len(slots):
                take("punct", ")")
                stack.pop()
                node = _build(frame)
                if not stack:
                    result = node
                    break
                stack[-1][2].append(node)
                continue
            slot = slots[done]
            if slot == "arrow_int":
                take("arrow")
            elif done > 0:
                take("punct", ",")
            if slot == "expr":
                break
            frame[2].append(int(take("int")[1]))
        if result is not None:
            break
    if tokens[i][0] != "eof":
        raise ExpressionSyntaxError(f"trailing input {tokens[i][1]!r}", tokens[i][2])
    check_expression(result)
    return result


def _build(frame: list) -> CwExpression:
    keyword, _, args = frame
    if keyword == "v":
        return Leaf(args[0], args[1])
    if keyword == "u":
        return Union(args[0], args[1])
    if keyword == "rho":
        return Relabel(args[0], args[1], args[2])
    return AddEdges(args[0], args[1], args[2])


# ---------------------------------------------------------------- formatting

def format_expression(expr: CwExpression) -> str:
    """Canonical text form without whitespace."""
    out: list[str] = []
    stack: list = [expr]
    while stack:
        item = stack.pop()
        if isinstance(item, str):
            out.append(item)
        elif isinstance(item, Leaf):
            out.append(f"v({item.vertex},{item.label})")
        elif isinstance(item, Union):
            out.append("u(")
            stack.extend([")", item.right, ",", item.left])
        elif isinstance(item, Relabel):
            out.append(f"rho({item.source}->{item.target},")
            stack.extend([")", item.child])
        else:
            out.append(f"eta({item.a},{item.b},")
            stack.extend([")", item.child])
    return "".join(out)


# ---------------------------------------------------------------- semantics

def _pair(u: int, v: int) -> tuple[int, int]:
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True)
class LabeledGraph:
    vertices: frozenset
    labels: dict
    edges: frozenset

    def __post_init__(self):
        if set(self.labels) != set(self.vertices):
            raise InvalidExpression("labels must be defined on exactly the vertex set")
        for u, v in self.edges:
            if u == v or u not in self.vertices or v not in self.vertices:
                raise InvalidExpression(f"bad edge {(u, v)}")


def label_buckets(expr: CwExpression, on_eta=None) -> dict[int, set]:
    """Replay expr bottom-up, returning label -> vertex set of graph(expr).

    ``on_eta(node, side_a, side_b)`` is called at every eta node with the
    vertex sets currently carrying labels a and b.  Child results are
    consumed in place (smaller buckets merge into larger ones).
    """
    results: dict[int, dict[int, set]] = {}
    for node in postorder(expr):
        if isinstance(node, Leaf):
            buckets = {node.label: {node.vertex}}
        elif isinstance(node, Union):
            buckets = results.pop(id(node.left))
            for label, verts in results.pop(id(node.right)).items():
                _merge_into(buckets, label, verts)
        elif isinstance(node, Relabel):
            buckets = results.pop(id(node.child))
            moved = buckets.pop(node.source, None)
            if moved:
                _merge_into(buckets, node.target, moved)
        else:
            buckets = results.pop(id(node.child))
            if on_eta is not None:
                on_eta(node, buckets.get(node.a, set()), buckets.get(node.b, set()))
        results[id(node)] = buckets
    return results[id(expr)]


def _merge_into(buckets: dict, label: int, verts: set) -> None:
    have = buckets.get(label)
    if have is None:
        buckets[label] = verts
    elif len(have) >= len(verts):
        have |= verts
    else:
        verts |= have
        buckets[label] = verts


def evaluate(expr: CwExpression) -> LabeledGraph:
    """Return graph(expr) by applying the four operations bottom-up."""
    edges: set = set()

    def join(node, side_a, side_b):
        edges.update(_pair(u, v) for u in side_a for v in side_b)

    buckets = label_buckets(expr, join)
    labels = {v: label for label, verts in buckets.items() for v in verts}
    return LabeledGraph(frozenset(labels), labels, frozenset(edges))


def width(expr: CwExpression) -> int:
    """Largest label mentioned anywhere in the expression."""
    best = 0
    for node in postorder(expr):
        if isinstance(node, Leaf):
            best = max(best, node.label)
        elif isinstance(node, Relabel):
            best = max(best, node.source, node.target)
        elif isinstance(node, AddEdges):
            best = max(best, node.a, node.b)
    return best


def validate_against(expr: CwExpression, target) -> bool:
    """True iff expr defines exactly target's vertex and edge sets (labels ignored).

    ``target`` is anything with ``vertices`` and ``edges`` attributes, edges
    being 2-element iterables.
    """
    graph = evaluate(expr)
    want_edges = {_pair(*e) for e in target.edges}
    return graph.vertices == frozenset(target.vertices) and graph.edges == want_edges
