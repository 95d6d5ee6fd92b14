"""State-set dynamic program over clique-width expressions, plus a brute-force oracle.

A state is a pair (L, f): L is the set of (label, codon value) pairs realised
by some admissible partial labeling and f its best score.  L is stored as a
bitmask with one bit per (label, codon) combination, see :mod:`mrso._accel`.
Scores are exact: every rational is scaled by the common denominator of the
instance's score tables and kept as an integer.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Iterable, Sequence

import numpy as np

from . import _accel
from .cwexpr import (
    CwExpression,
    Leaf,
    Relabel,
    Union,
    check_expression,
    label_buckets,
    postorder,
    validate_against,
    width,
)
from .errors import BudgetExceeded, ExpressionMismatch, HeterogeneousEta, InvalidExpression, WitnessError
from .instance import INFEASIBLE, MrsoInstance, format_rational, score_labeling

__all__ = [
    "DpContext",
    "StateSet",
    "Solution",
    "EtaInfo",
    "dp_leaf",
    "dp_union",
    "dp_eta",
    "dp_rho",
    "prune",
    "analyze_eta",
    "solve",
    "brute_force",
    "DEFAULT_BUDGET",
]

DEFAULT_BUDGET = 1 << 20
_INT64_HEADROOM = 1 << 62

EXACT = "exact"
CONSERVATIVE = "conservative"


@dataclass
class StateSet:
    """States of one expression node.

    ``prov[r]`` points back to what built row ``r``: the codon index for a
    leaf, ``(left_row, right_row)`` for a union, the child row otherwise.
    """

    masks: np.ndarray
    scores: np.ndarray
    prov: np.ndarray

    def __len__(self) -> int:
        return self.masks.shape[0]


class DpContext:
    """Bit layout, score scaling and Gamma tables for one (instance, width) pair."""

    def __init__(self, instance: MrsoInstance, k: int, threads: int = 1):
        alphabet = instance.alphabet
        self.instance = instance
        self.alphabet = alphabet
        self.k = k
        self.base = alphabet.size
        self.clen = alphabet.codon_length
        self.ncodon = alphabet.codon_count
        self.codons = alphabet.codons()
        self.nbits = k * self.ncodon
        self.words = max(1, -(-self.nbits // 64))
        idx = np.arange(self.ncodon)
        # digits[c, p]: symbol index at 0-based position p of codon c
        self.digits = np.stack(
            [(idx // self.base ** (self.clen - 1 - p)) % self.base for p in range(self.clen)], axis=1
        ) if self.clen else np.zeros((self.ncodon, 0), dtype=np.int64)
        sym = {s: i for i, s in enumerate(alphabet.symbols)}
        self.gamma = np.zeros((self.base, self.base), dtype=bool)
        for x, y in alphabet.sym_gamma:
            self.gamma[sym[x], sym[y]] = True
        self._incompat_cache: dict = {}

        denominators = [1]
        span = 0
        for i in range(1, instance.n + 1):
            table = instance.scores[i]
            values = list(table.entries.values()) + [table.default]
            denominators.extend(v.denominator for v in values)
            span += max(abs(v) for v in values)
        self.scale = math.lcm(*denominators)
        self.dtype = np.int64 if span * self.scale < _INT64_HEADROOM else object

        self.threads = max(1, int(threads))
        self.pool = ThreadPoolExecutor(self.threads) if self.threads > 1 else None

    def close(self) -> None:
        if self.pool is not None:
            self.pool.shutdown()
            self.pool = None

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    # -- helpers

    def offset(self, label: int) -> int:
        if not 1 <= label <= self.k:
            raise InvalidExpression(f"label {label} outside 1..{self.k}")
        return (label - 1) * self.ncodon

    def codon_index(self, codon: str) -> int:
        sym = self.alphabet.symbols
        value = 0
        for ch in codon:
            value = value * self.base + sym.index(ch)
        return value

    def compat(self, patterns: Iterable) -> np.ndarray:
        """compat[l1, l2]: codon pair (l1, l2) satisfies every (p, q) bond pattern."""
        ok = np.ones((self.ncodon, self.ncodon), dtype=bool)
        for p, q in patterns:
            ok &= self.gamma[self.digits[:, p - 1][:, None], self.digits[:, q - 1][None, :]]
        return ok

    def incompat(self, patterns: frozenset) -> np.ndarray:
        key = frozenset(patterns)
        if key not in self._incompat_cache:
            self._incompat_cache[key] = ~self.compat(key)
        return self._incompat_cache[key]

    def projection(self, positions) -> np.ndarray:
        """Codon index with every digit outside ``positions`` (0-based) zeroed."""
        weights = np.array([self.base ** (self.clen - 1 - p) for p in range(self.clen)], dtype=np.int64)
        keep = np.zeros(self.clen, dtype=bool)
        keep[list(positions)] = True
        return (self.digits * (weights * keep)).sum(axis=1).astype(np.int64)

    def scaled(self, value: Fraction):
        v = value * self.scale
        assert v.denominator == 1
        return int(v.numerator)

    def decode(self, states: StateSet) -> list[tuple[frozenset, Fraction]]:
        """States as (L, f) pairs with L a frozenset of (label, codon string)."""
        bits = _accel.unpack_bits(states.masks)[:, :self.nbits]
        out = []
        for r in range(len(states)):
            pairs = frozenset(
                (int(j) // self.ncodon + 1, self.codons[int(j) % self.ncodon]) for j in np.flatnonzero(bits[r])
            )
            out.append((pairs, Fraction(int(states.scores[r]), self.scale)))
        return out

    def encode(self, states: Sequence[tuple[Iterable, Fraction]]) -> StateSet:
        """Build a StateSet from explicit (L, f) pairs (mainly for tests)."""
        bits = np.zeros((len(states), 64 * self.words), dtype=np.uint8)
        scores = np.zeros(len(states), dtype=self.dtype)
        for r, (pairs, f) in enumerate(states):
            for label, codon in pairs:
                bits[r, self.offset(label) + self.codon_index(codon)] = 1
            scores[r] = self.scaled(Fraction(f))
        prov = np.stack([np.arange(len(states)), -np.ones(len(states), dtype=np.int64)], axis=1)
        return StateSet(_accel.pack_bits(bits), scores, prov.astype(np.int64))


# ---------------------------------------------------------------- DP cases

def _score_key(scores: np.ndarray) -> np.ndarray:
    if scores.dtype == object:
        return np.unique(scores, return_inverse=True)[1].astype(np.int64).ravel()
    return scores


def prune(ctx: DpContext, states: StateSet, dominance: bool = True) -> StateSet:
    """Sort states canonically by L and merge duplicates.

    With ``dominance`` one state per distinct L survives: the highest f,
    earliest row on ties.  Without it only identical (L, f) pairs merge.
    """
    n = len(states)
    if n == 0:
        return states
    masks = states.masks
    key = _score_key(states.scores)
    sort_keys = [np.arange(n), -key] + [masks[:, w] for w in range(masks.shape[1])]
    order = np.lexsort(sort_keys)
    sm = masks[order]
    new_group = np.ones(n, dtype=bool)
    new_group[1:] = np.any(sm[1:] != sm[:-1], axis=1)
    if not dominance:
        sk = key[order]
        new_group[1:] |= sk[1:] != sk[:-1]
    pick = order[new_group]
    return StateSet(masks[pick], states.scores[pick], states.prov[pick])


def dp_leaf(ctx: DpContext, vertex: int, label: int, positions=None, dominance: bool = True) -> StateSet:
    """States of a single labeled vertex: one per admissible codon value.

    ``positions`` (0-based codon positions) projects codon values onto the
    positions later joins can inspect; ``None`` keeps them whole.
    """
    instance = ctx.instance
    table = instance.scores[vertex]
    intra = instance.implied.intra.get(vertex, frozenset())
    gamma = instance.alphabet.sym_gamma
    rows, scores = [], []
    for c, codon in enumerate(ctx.codons):
        if codon in table.forbidden:
            continue
        if any((codon[p - 1], codon[q - 1]) not in gamma for p, q in intra):
            continue
        rows.append(c)
        scores.append(ctx.scaled(table(codon)))
    rows = np.array(rows, dtype=np.int64)
    reps = rows if positions is None else ctx.projection(positions)[rows]
    bits = np.zeros((len(rows), 64 * ctx.words), dtype=np.uint8)
    bits[np.arange(len(rows)), ctx.offset(label) + reps] = 1
    prov = np.stack([rows, -np.ones(len(rows), dtype=np.int64)], axis=1)
    states = StateSet(_accel.pack_bits(bits), np.array(scores, dtype=ctx.dtype), prov)
    return prune(ctx, states, dominance)


def dp_union(ctx: DpContext, left: StateSet, right: StateSet, dominance: bool = True) -> StateSet:
    masks = _accel.product_or(left.masks, right.masks, ctx.pool, ctx.threads)
    s1, s2 = len(left), len(right)
    scores = (left.scores[:, None] + right.scores[None, :]).reshape(-1)
    if scores.dtype != ctx.dtype:
        scores = scores.astype(ctx.dtype)
    prov = np.stack([np.repeat(np.arange(s1), s2), np.tile(np.arange(s2), s1)], axis=1).astype(np.int64)
    return prune(ctx, StateSet(masks, scores, prov), dominance)


def dp_eta(ctx: DpContext, states: StateSet, a: int, b: int, patterns) -> StateSet:
    """Keep the states whose a-codons and b-codons pairwise satisfy the bond patterns."""
    patterns = frozenset(patterns)
    keep = _accel.eta_keep(states.masks, ctx.offset(a), ctx.offset(b), ctx.ncodon,
                           ctx.incompat(patterns), ctx.pool, ctx.threads)
    rows = np.flatnonzero(keep)
    prov = np.stack([rows, -np.ones(len(rows), dtype=np.int64)], axis=1)
    return StateSet(states.masks[rows], states.scores[rows], prov)


def _relabel_target(ctx: DpContext, mapping: dict, codon_maps: dict | None = None) -> np.ndarray:
    target = np.arange(ctx.nbits, dtype=np.int64)
    codon = np.arange(ctx.ncodon, dtype=np.int64)
    for label in range(1, ctx.k + 1):
        dst = mapping.get(label, label)
        cmap = codon_maps.get(label, codon) if codon_maps else codon
        lo = ctx.offset(label)
        target[lo:lo + ctx.ncodon] = ctx.offset(dst) + cmap
    return target


def _transform(ctx: DpContext, states: StateSet, target: np.ndarray, dominance: bool) -> StateSet:
    masks = _accel.remap(states.masks, target, ctx.words, ctx.pool, ctx.threads)
    prov = np.stack([np.arange(len(states)), -np.ones(len(states), dtype=np.int64)], axis=1)
    return prune(ctx, StateSet(masks, states.scores, prov), dominance)


def dp_rho(ctx: DpContext, states: StateSet, a: int, b: int, dominance: bool = True) -> StateSet:
    """Rewrite every (a, l) in L to (b, l), then merge states that now coincide."""
    if a == b:
        raise InvalidExpression("rho needs two distinct labels")
    return _transform(ctx, states, _relabel_target(ctx, {a: b}), dominance)


def _project(ctx: DpContext, states: StateSet, positions_by_label: dict, dominance: bool) -> StateSet:
    maps = {label: ctx.projection(pos) for label, pos in positions_by_label.items()}
    return _transform(ctx, states, _relabel_target(ctx, {}, maps), dominance)


# ---------------------------------------------------------------- expression analysis

@dataclass(frozen=True)
class EtaInfo:
    """What one eta node joins: oriented bond patterns of every a-b codon pair."""

    pairs: tuple
    pattern_sets: tuple

    @property
    def uniform(self) -> bool:
        return len(set(self.pattern_sets)) <= 1

    @property
    def merged(self) -> frozenset:
        """Union of all patterns: the sound (possibly over-strict) filter."""
        out: set = set()
        for ps in self.pattern_sets:
            out |= ps
        return frozenset(out)


def analyze_eta(instance: MrsoInstance, expr: CwExpression) -> dict[int, EtaInfo]:
    """Replay expr and record, per eta node id, the codon pairs it joins."""
    implied = instance.implied
    info: dict[int, EtaInfo] = {}

    def record(node, side_a, side_b):
        pairs = tuple((u, v) for u in sorted(side_a) for v in sorted(side_b))
        info[id(node)] = EtaInfo(pairs, tuple(implied.patterns(u, v) for u, v in pairs))

    label_buckets(expr, record)
    return info


def _relevance(expr: CwExpression, eta_patterns: dict[int, frozenset]) -> dict[int, dict]:
    """Per node id: label -> 0-based codon positions some ancestor join inspects."""
    rel: dict[int, dict] = {id(expr): {}}
    stack = [expr]
    while stack:
        node = stack.pop()
        here = rel[id(node)]
        if isinstance(node, Leaf):
            continue
        if isinstance(node, Union):
            rel[id(node.left)] = here
            rel[id(node.right)] = here
            stack.extend([node.right, node.left])
            continue
        below = dict(here)
        if isinstance(node, Relabel):
            target = here.get(node.target, frozenset())
            below[node.source] = target
            below[node.target] = target
        else:
            pats = eta_patterns[id(node)]
            below[node.a] = below.get(node.a, frozenset()) | {p - 1 for p, _ in pats}
            below[node.b] = below.get(node.b, frozenset()) | {q - 1 for _, q in pats}
        rel[id(node.child)] = below
        stack.append(node.child)
    return rel


# ---------------------------------------------------------------- solving

@dataclass
class Solution:
    value: object  # Fraction or INFEASIBLE
    witness: tuple | None
    exact: bool
    states_peak: int = 0
    nodes: int = 0

    @property
    def feasible(self) -> bool:
        return self.value is not INFEASIBLE

    def to_dict(self) -> dict:
        return {
            "value": "infeasible" if self.value is INFEASIBLE else format_rational(self.value),
            "witness": list(self.witness) if self.witness is not None else None,
            "exact": self.exact,
            "states_peak": self.states_peak,
            "nodes": self.nodes,
        }


def solve(
    instance: MrsoInstance,
    expr: CwExpression,
    mode: str = EXACT,
    *,
    prune_states: bool = True,
    project: bool = True,
    threads: int = 1,
) -> Solution:
    """Maximise the MRSO score over the implied graph defined by ``expr``.

    ``mode="exact"`` refuses eta nodes joining codon pairs with different
    bond patterns (HeterogeneousEta); ``"conservative"`` filters those with
    the union of the patterns, which never admits an infeasible labeling
    but may miss the optimum, and reports ``exact=False``.

    ``prune_states`` keeps only the best f per L; ``project`` additionally
    identifies codon values that agree on every position a later join can
    inspect.  Both are exact; turning pruning off also disables projection.
    """
    if mode not in (EXACT, CONSERVATIVE):
        raise ValueError(f"mode must be 'exact' or 'conservative', got {mode!r}")
    check_expression(expr)
    if not validate_against(expr, instance.implied):
        raise ExpressionMismatch("expression does not define the implied structure graph")
    etas = analyze_eta(instance, expr)
    patterns: dict[int, frozenset] = {}
    for node_id, info in etas.items():
        if not info.uniform and mode == EXACT:
            kinds = sorted({tuple(sorted(ps)) for ps in info.pattern_sets})
            raise HeterogeneousEta(f"eta joins codon pairs with differing bond patterns {kinds}")
        patterns[node_id] = info.merged
    project = project and prune_states
    k = width(expr)
    rel = _relevance(expr, patterns) if project else None

    with DpContext(instance, k, threads) as ctx:
        table: dict[int, StateSet] = {}
        peak = 0
        count = 0
        for node in postorder(expr):
            count += 1
            if isinstance(node, Leaf):
                pos = rel[id(node)].get(node.label, frozenset()) if project else None
                states = dp_leaf(ctx, node.vertex, node.label, pos, prune_states)
            elif isinstance(node, Union):
                states = dp_union(ctx, table[id(node.left)], table[id(node.right)], prune_states)
            elif isinstance(node, Relabel):
                states = dp_rho(ctx, table[id(node.child)], node.source, node.target, prune_states)
            else:
                states = dp_eta(ctx, table[id(node.child)], node.a, node.b, patterns[id(node)])
                if project:
                    here = rel[id(node)]
                    proj = {lab: here.get(lab, frozenset()) for lab in (node.a, node.b)}
                    states = _chain(states, _project(ctx, states, proj, True))
            table[id(node)] = states
            peak = max(peak, len(states))

        root = table[id(expr)]
        if len(root) == 0:
            return Solution(INFEASIBLE, None, mode == EXACT, peak, count)
        best = int(np.argmax(root.scores)) if root.scores.dtype != object else \
            max(range(len(root)), key=lambda r: (root.scores[r], -r))
        witness = _reconstruct(ctx, expr, table, best)
        value = Fraction(int(root.scores[best]), ctx.scale)

    check = score_labeling(instance, witness)
    if check is INFEASIBLE or check != value:
        raise WitnessError(f"witness {witness} re-scores to {check}, solver reported {value}")
    return Solution(value, witness, mode == EXACT, peak, count)


def _chain(inner: StateSet, outer: StateSet) -> StateSet:
    """Compose back-pointers of two successive single-child steps."""
    prov = outer.prov.copy()
    prov[:, 0] = inner.prov[outer.prov[:, 0], 0]
    return StateSet(outer.masks, outer.scores, prov)


def _reconstruct(ctx: DpContext, expr: CwExpression, table: dict, row: int) -> tuple:
    codons: dict[int, str] = {}
    stack = [(expr, row)]
    while stack:
        node, r = stack.pop()
        prov = table[id(node)].prov[r]
        if isinstance(node, Leaf):
            codons[node.vertex] = ctx.codons[int(prov[0])]
        elif isinstance(node, Union):
            stack.append((node.left, int(prov[0])))
            stack.append((node.right, int(prov[1])))
        else:
            stack.append((node.child, int(prov[0])))
    return tuple(codons[i] for i in range(1, ctx.instance.n + 1))


def brute_force(instance: MrsoInstance, budget: int = DEFAULT_BUDGET) -> Solution:
    """Enumerate every nucleotide labeling; ties go to the lexicographically first."""
    alphabet = instance.alphabet
    c = alphabet.codon_length
    total = alphabet.size ** (c * instance.n)
    if total > budget:
        raise BudgetExceeded(f"{total} labelings exceed the budget of {budget}")
    best_value, best = None, None
    for letters in product(alphabet.symbols, repeat=c * instance.n):
        word = "".join(letters)
        labeling = tuple(word[i:i + c] for i in range(0, len(word), c))
        value = score_labeling(instance, labeling)
        if value is INFEASIBLE:
            continue
        if best_value is None or value > best_value:
            best_value, best = value, labeling
    if best is None:
        return Solution(INFEASIBLE, None, True)
    return Solution(best_value, best, True)
