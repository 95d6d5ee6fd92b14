"""Expression builders for plain graphs, the MIS reduction, and random instances."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .cwexpr import AddEdges, CwExpression, Leaf, Relabel, Union
from .errors import DegreeTooHigh, InstanceError, MrsoError, NotCograph, NotTree
from .instance import Alphabet, CodonScores, MrsoInstance, ScoreTable, StructureGraph

__all__ = [
    "PlainGraph",
    "naive_expression",
    "cograph_expression",
    "tree_expression",
    "mis_reduction",
    "MIS_ALPHABET",
    "random_instance",
    "random_cograph",
    "random_tree",
    "random_bounded_degree_graph",
    "patterned_instance",
    "read_edge_list",
    "write_edge_list",
    "max_independent_set_size",
    "mis_witness",
]


@dataclass(frozen=True)
class PlainGraph:
    vertices: frozenset
    edges: frozenset

    def __post_init__(self):
        object.__setattr__(self, "vertices", frozenset(self.vertices))
        norm = set()
        for u, v in self.edges:
            if u == v:
                raise InstanceError(f"self-loop at {u}")
            if u not in self.vertices or v not in self.vertices:
                raise InstanceError(f"edge {(u, v)} leaves the vertex set")
            norm.add((min(u, v), max(u, v)))
        object.__setattr__(self, "edges", frozenset(norm))

    @classmethod
    def from_edges(cls, n: int, edges) -> "PlainGraph":
        return cls(frozenset(range(1, n + 1)), frozenset(edges))

    def adjacency(self) -> dict[int, set]:
        adj = {v: set() for v in self.vertices}
        for u, v in self.edges:
            adj[u].add(v)
            adj[v].add(u)
        return adj

    def induced(self, keep) -> "PlainGraph":
        keep = frozenset(keep)
        return PlainGraph(keep, frozenset(e for e in self.edges if e[0] in keep and e[1] in keep))


def _components(vertices, adj) -> list[list[int]]:
    seen: set = set()
    comps = []
    for start in sorted(vertices):
        if start in seen:
            continue
        comp, stack = [], [start]
        seen.add(start)
        while stack:
            v = stack.pop()
            comp.append(v)
            for w in adj[v]:
                if w in vertices and w not in seen:
                    seen.add(w)
                    stack.append(w)
        comps.append(sorted(comp))
    return comps


# ---------------------------------------------------------------- expressions

def naive_expression(g: PlainGraph) -> CwExpression:
    """One label per vertex; each new vertex is joined to its earlier neighbours.

    Vertices are added in ascending id order, and the eta nodes for edges to
    already-placed vertices follow that vertex's union immediately, so every
    eta introduces exactly one edge.
    """
    if not g.vertices:
        raise InstanceError("graph must be nonempty")
    order = sorted(g.vertices)
    label = {v: i for i, v in enumerate(order, start=1)}
    adj = g.adjacency()
    expr: CwExpression = Leaf(order[0], 1)
    for v in order[1:]:
        expr = Union(expr, Leaf(v, label[v]))
        for u in sorted(adj[v]):
            if label[u] < label[v]:
                expr = AddEdges(label[u], label[v], expr)
    return expr


def cograph_expression(g: PlainGraph) -> CwExpression:
    """Width-2 expression via complement-connectivity recursion, or NotCograph."""
    if not g.vertices:
        raise InstanceError("graph must be nonempty")
    adj = g.adjacency()
    return _cograph(frozenset(g.vertices), adj)


def _cograph(vertices: frozenset, adj) -> CwExpression:
    if len(vertices) == 1:
        (v,) = vertices
        return Leaf(v, 1)
    comps = _components(vertices, adj)
    if len(comps) > 1:
        expr = _cograph(frozenset(comps[0]), adj)
        for comp in comps[1:]:
            expr = Union(expr, _cograph(frozenset(comp), adj))
        return expr
    co_adj = {v: (vertices - adj[v]) - {v} for v in vertices}
    co_comps = _components(vertices, co_adj)
    if len(co_comps) == 1:
        raise NotCograph(f"vertex set {sorted(vertices)} is connected with a connected complement")
    expr = _cograph(frozenset(co_comps[0]), adj)
    for comp in co_comps[1:]:
        part = _cograph(frozenset(comp), adj)
        side = Leaf(part.vertex, 2) if isinstance(part, Leaf) else Relabel(1, 2, part)
        expr = Relabel(2, 1, AddEdges(1, 2, Union(expr, side)))
    return expr


def tree_expression(g: PlainGraph) -> CwExpression:
    """Width-3 expression for a tree rooted at its smallest vertex, or NotTree.

    Each subtree expression has exactly one label-2 vertex (its root) and all
    others labeled 1; label 3 is scratch for attaching one child at a time.
    """
    if not g.vertices:
        raise InstanceError("graph must be nonempty")
    if len(g.edges) != len(g.vertices) - 1:
        raise NotTree(f"{len(g.vertices)} vertices with {len(g.edges)} edges is not a tree")
    adj = g.adjacency()
    if len(_components(g.vertices, adj)) != 1:
        raise NotTree("graph is disconnected")
    root = min(g.vertices)
    parent = {root: None}
    order = [root]
    for v in order:
        for w in sorted(adj[v]):
            if w not in parent:
                parent[w] = v
                order.append(w)
    built: dict[int, CwExpression] = {}
    for v in reversed(order):
        expr: CwExpression = Leaf(v, 2)
        for w in sorted(adj[v]):
            if parent.get(w) == v:
                child = built.pop(w)
                expr = Relabel(3, 1, AddEdges(2, 3, Union(expr, Relabel(2, 3, child))))
        built[v] = expr
    return built[root]


# ---------------------------------------------------------------- MIS reduction

# 'A' and 'B' stand for the complements of 'a' and 'b'.
MIS_ALPHABET = Alphabet(("a", "b", "A", "B"), frozenset({("a", "A"), ("b", "B")}), 3)


def mis_reduction(g: PlainGraph) -> MrsoInstance:
    """MRSO-d1 instance whose optimum is the maximum independent set size of g.

    Vertex ranks (ascending id) become codon indices.  A vertex's edges go to
    its codon positions 1, 2, 3 in ascending neighbour order, so each
    nucleotide carries at most one bond.  Only codon ``aaa`` scores (1).
    """
    adj = g.adjacency()
    for v, nbrs in adj.items():
        if len(nbrs) > 3:
            raise DegreeTooHigh(f"vertex {v} has degree {len(nbrs)} > 3")
    order = sorted(g.vertices)
    rank = {v: i for i, v in enumerate(order, start=1)}
    slot = {(v, w): p for v in order for p, w in enumerate(sorted(adj[v]), start=1)}
    bonds = set()
    for u, v in g.edges:
        r = 3 * (rank[u] - 1) + slot[(u, v)]
        s = 3 * (rank[v] - 1) + slot[(v, u)]
        bonds.add((min(r, s), max(r, s)))
    scores = ScoreTable({i: CodonScores({"aaa": Fraction(1)}) for i in range(1, len(order) + 1)})
    return MrsoInstance(MIS_ALPHABET, StructureGraph(len(order), frozenset(bonds), 3), scores)


def mis_witness(g: PlainGraph, chosen) -> tuple:
    """Feasible labeling of mis_reduction(g) selecting exactly ``chosen``.

    Unselected codons: toward a selected neighbour 'A'; toward an unselected
    neighbour 'b' on the lower-id end and 'B' on the higher; unbonded 'b'.
    """
    chosen = set(chosen)
    adj = g.adjacency()
    out = []
    for v in sorted(g.vertices):
        if v in chosen:
            out.append("aaa")
            continue
        codon = ["b", "b", "b"]
        for p, w in enumerate(sorted(adj[v])):
            if w in chosen:
                codon[p] = "A"
            else:
                codon[p] = "b" if v < w else "B"
        out.append("".join(codon))
    return tuple(out)


def max_independent_set_size(g: PlainGraph) -> int:
    """Exhaustive maximum independent set size (fine up to ~20 vertices)."""
    order = sorted(g.vertices)
    idx = {v: i for i, v in enumerate(order)}
    nbr = [0] * len(order)
    for u, v in g.edges:
        nbr[idx[u]] |= 1 << idx[v]
        nbr[idx[v]] |= 1 << idx[u]
    best = 0
    for subset in range(1 << len(order)):
        size = bin(subset).count("1")
        if size <= best:
            continue
        s, ok = subset, True
        while s:
            low = s & -s
            if nbr[low.bit_length() - 1] & subset:
                ok = False
                break
            s ^= low
        if ok:
            best = size
    return best


# ---------------------------------------------------------------- random generation

def _rng(seed) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def random_instance(
    n: int,
    bond_count: int,
    alphabet: Alphabet,
    seed: int,
    *,
    forbid_rate: float = 0.0,
) -> MrsoInstance:
    """Seeded d1 instance with integer scores in [-3, 3].

    Every codon index gets a full table when the codon space has at most 16
    values, otherwise 16 random entries over a random default.  With
    ``forbid_rate`` each codon value is forbidden at each index with that
    probability.
    """
    c = alphabet.codon_length
    if n < 1:
        raise InstanceError("n must be positive")
    if bond_count < 0 or 2 * bond_count > c * n:
        raise InstanceError(f"{bond_count} disjoint bonds need {2 * bond_count} nucleotides, only {c * n} exist")
    rng = _rng(seed)
    nucleotides = rng.permutation(np.arange(1, c * n + 1))[: 2 * bond_count]
    bonds = frozenset(
        (int(min(nucleotides[2 * t], nucleotides[2 * t + 1])), int(max(nucleotides[2 * t], nucleotides[2 * t + 1])))
        for t in range(bond_count)
    )
    codons = alphabet.codons()
    tables = {}
    for i in range(1, n + 1):
        default = Fraction(int(rng.integers(-3, 4)))
        listed = codons if len(codons) <= 16 else [codons[j] for j in sorted(rng.choice(len(codons), 16, replace=False))]
        entries = {codon: Fraction(int(rng.integers(-3, 4))) for codon in listed}
        forbidden = frozenset()
        if forbid_rate > 0:
            forbidden = frozenset(codon for codon in codons if rng.random() < forbid_rate)
        tables[i] = CodonScores(entries, default, forbidden)
    return MrsoInstance(alphabet, StructureGraph(n, bonds, c), ScoreTable(tables))


def patterned_instance(g: PlainGraph, alphabet: Alphabet, seed, max_bonds: int = 2) -> MrsoInstance:
    """Instance whose implied graph is g, each edge carrying 1..max_bonds random bonds.

    Bonds may share nucleotides (not d1), so different edges of one join can
    carry different patterns.  Vertices must be 1..n.
    """
    rng = _rng(seed)
    n = len(g.vertices)
    if g.vertices != frozenset(range(1, n + 1)):
        raise InstanceError("patterned_instance needs vertices 1..n")
    c = alphabet.codon_length
    bonds = set()
    for u, v in sorted(g.edges):
        for _ in range(int(rng.integers(1, max_bonds + 1))):
            p, q = int(rng.integers(1, c + 1)), int(rng.integers(1, c + 1))
            bonds.add((c * (u - 1) + p, c * (v - 1) + q))
    codons = alphabet.codons()
    tables = {
        i: CodonScores({codon: Fraction(int(rng.integers(-3, 4))) for codon in codons}, Fraction(0))
        for i in range(1, n + 1)
    }
    return MrsoInstance(alphabet, StructureGraph(n, frozenset(bonds), c), ScoreTable(tables))


def random_cograph(n: int, seed) -> PlainGraph:
    """Graph of a random cotree on vertices 1..n."""
    rng = _rng(seed)

    def build(verts: list[int]) -> set:
        if len(verts) == 1:
            return set()
        cut = int(rng.integers(1, len(verts)))
        left, right = verts[:cut], verts[cut:]
        edges = build(left) | build(right)
        if rng.random() < 0.5:
            edges |= {(min(u, v), max(u, v)) for u in left for v in right}
        return edges

    verts = [int(v) for v in rng.permutation(np.arange(1, n + 1))]
    return PlainGraph.from_edges(n, build(verts))


def random_tree(n: int, seed) -> PlainGraph:
    rng = _rng(seed)
    labels = [int(v) for v in rng.permutation(np.arange(1, n + 1))]
    edges = set()
    for i in range(1, n):
        j = int(rng.integers(0, i))
        u, v = labels[i], labels[j]
        edges.add((min(u, v), max(u, v)))
    return PlainGraph.from_edges(n, edges)


def random_bounded_degree_graph(n: int, seed, max_degree: int = 3, extra: float = 0.6, connected: bool = True) -> PlainGraph:
    """Random graph with degrees <= max_degree: a random tree plus extra edges."""
    rng = _rng(seed)
    for _ in range(1000):
        tree = random_tree(n, rng) if connected else PlainGraph.from_edges(n, ())
        adj = tree.adjacency()
        if any(len(s) > max_degree for s in adj.values()):
            continue
        edges = set(tree.edges)
        for _ in range(int(extra * n)):
            u, v = (int(x) for x in rng.choice(np.arange(1, n + 1), 2, replace=False))
            if v in adj[u] or len(adj[u]) >= max_degree or len(adj[v]) >= max_degree:
                continue
            adj[u].add(v)
            adj[v].add(u)
            edges.add((min(u, v), max(u, v)))
        return PlainGraph.from_edges(n, edges)
    raise MrsoError(f"could not draw a degree-{max_degree} spanning tree on {n} vertices")


# ---------------------------------------------------------------- edge-list files

def read_edge_list(path) -> PlainGraph:
    """Read "n m" followed by m lines "u v" (1-based)."""
    with open(path, encoding="utf-8") as fh:
        lines = [(no, ln.split()) for no, ln in enumerate(fh, start=1) if ln.strip()]
    if not lines:
        raise InstanceError(f"{path}: empty edge list")
    try:
        no, head = lines[0]
        n, m = int(head[0]), int(head[1])
        if len(head) != 2:
            raise ValueError
        edges = []
        for no, parts in lines[1:]:
            if len(parts) != 2:
                raise ValueError
            edges.append((int(parts[0]), int(parts[1])))
    except (ValueError, IndexError):
        raise InstanceError(f"{path}: line {no}: expected two integers") from None
    if len(edges) != m:
        raise InstanceError(f"{path}: header announces {m} edges, found {len(edges)}")
    try:
        return PlainGraph.from_edges(n, edges)
    except InstanceError as exc:
        raise InstanceError(f"{path}: {exc}") from None


def write_edge_list(g: PlainGraph, path) -> None:
    edges = sorted(g.edges)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{max(g.vertices, default=0)} {len(edges)}\n")
        for u, v in edges:
            fh.write(f"{u} {v}\n")
