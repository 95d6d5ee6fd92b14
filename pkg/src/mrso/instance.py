"""MRSO instances at nucleotide level and the derived implied structure graph."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from itertools import product
from typing import Iterable, Mapping, Sequence

from .errors import InstanceError, MalformedLabeling

__all__ = [
    "INFEASIBLE",
    "Alphabet",
    "StructureGraph",
    "ImpliedStructure",
    "CodonScores",
    "ScoreTable",
    "MrsoInstance",
    "derive_implied",
    "pair_satisfies_gamma",
    "is_d1",
    "score_labeling",
    "parse_rational",
    "format_rational",
    "load_instance",
    "dump_instance",
    "instance_to_dict",
    "instance_from_dict",
]


class _Infeasible:
    """Singleton outcome for instances without an admissible labeling."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "INFEASIBLE"

    def __reduce__(self):
        return (_Infeasible, ())


INFEASIBLE = _Infeasible()


def parse_rational(value) -> Fraction:
    if isinstance(value, bool):
        raise InstanceError(f"not a rational: {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise InstanceError(f"not a rational: {value!r}") from exc
    raise InstanceError(f"not a rational: {value!r}")


def format_rational(value: Fraction) -> str:
    return f"{value.numerator}/{value.denominator}"


@dataclass(frozen=True)
class Alphabet:
    """Nucleotide symbols, complementary pairs and codon length.

    Symbols are single characters so codon values are plain strings.
    ``gamma`` is kept as given; constraints consult its symmetric closure.
    """

    symbols: tuple
    gamma: frozenset
    codon_length: int = 3

    def __post_init__(self):
        object.__setattr__(self, "symbols", tuple(self.symbols))
        object.__setattr__(self, "gamma", frozenset(tuple(p) for p in self.gamma))
        if not self.symbols:
            raise InstanceError("alphabet needs at least one symbol")
        if len(set(self.symbols)) != len(self.symbols):
            raise InstanceError("alphabet symbols must be distinct")
        for s in self.symbols:
            if not isinstance(s, str) or len(s) != 1:
                raise InstanceError(f"symbols must be single characters, got {s!r}")
        for x, y in self.gamma:
            if x not in self.symbols or y not in self.symbols:
                raise InstanceError(f"gamma pair {(x, y)} uses unknown symbols")
        if self.codon_length < 1:
            raise InstanceError("codon_length must be positive")

    @cached_property
    def sym_gamma(self) -> frozenset:
        return self.gamma | frozenset((y, x) for x, y in self.gamma)

    @property
    def size(self) -> int:
        return len(self.symbols)

    @property
    def codon_count(self) -> int:
        return self.size ** self.codon_length

    def codons(self) -> list[str]:
        """All codon values in lexicographic order of the symbol order."""
        return ["".join(t) for t in product(self.symbols, repeat=self.codon_length)]

    def check_codon(self, codon) -> None:
        if not isinstance(codon, str) or len(codon) != self.codon_length:
            raise MalformedLabeling(f"codon {codon!r} must have length {self.codon_length}")
        for ch in codon:
            if ch not in self.symbols:
                raise MalformedLabeling(f"codon {codon!r} uses unknown symbol {ch!r}")


@dataclass(frozen=True)
class StructureGraph:
    n: int
    bonds: frozenset  # of sorted (r, s) pairs, 1-based nucleotide indices
    codon_length: int = 3

    def __post_init__(self):
        if self.n < 0:
            raise InstanceError("n must be non-negative")
        norm = set()
        for bond in self.bonds:
            r, s = bond
            if r == s:
                raise InstanceError(f"bond {bond} joins a nucleotide to itself")
            for x in (r, s):
                if not 1 <= x <= self.codon_length * self.n:
                    raise InstanceError(f"bond {bond} out of range 1..{self.codon_length * self.n}")
            norm.add((min(r, s), max(r, s)))
        object.__setattr__(self, "bonds", frozenset(norm))


@dataclass(frozen=True)
class ImpliedStructure:
    """Codon-level graph plus the bond patterns that every edge carries.

    ``edge_bonds[(i, j)]`` with ``i < j`` holds 1-based position pairs
    ``(p, q)``: position ``p`` of codon ``i`` is bonded to position ``q`` of
    codon ``j``.
    """

    vertices: frozenset
    edges: frozenset
    edge_bonds: Mapping
    intra: Mapping

    def patterns(self, u: int, v: int) -> frozenset:
        """Bond patterns oriented from codon u to codon v."""
        if u < v:
            return self.edge_bonds.get((u, v), frozenset())
        return frozenset((q, p) for p, q in self.edge_bonds.get((v, u), frozenset()))

    def degree(self, i: int) -> int:
        return sum(1 for e in self.edges if i in e)


def derive_implied(structure: StructureGraph, codon_length: int | None = None) -> ImpliedStructure:
    c = structure.codon_length if codon_length is None else codon_length
    edge_bonds: dict[tuple[int, int], set] = {}
    intra: dict[int, set] = {}
    for r, s in structure.bonds:
        i, p = divmod(r - 1, c)
        j, q = divmod(s - 1, c)
        i, j, p, q = i + 1, j + 1, p + 1, q + 1
        if i == j:
            intra.setdefault(i, set()).add((min(p, q), max(p, q)))
        elif i < j:
            edge_bonds.setdefault((i, j), set()).add((p, q))
        else:
            edge_bonds.setdefault((j, i), set()).add((q, p))
    return ImpliedStructure(
        vertices=frozenset(range(1, structure.n + 1)),
        edges=frozenset(edge_bonds),
        edge_bonds={e: frozenset(ps) for e, ps in edge_bonds.items()},
        intra={i: frozenset(ps) for i, ps in intra.items()},
    )


def pair_satisfies_gamma(l1: str, l2: str, patterns: Iterable, alphabet: Alphabet) -> bool:
    gamma = alphabet.sym_gamma
    return all((l1[p - 1], l2[q - 1]) in gamma for p, q in patterns)


def is_d1(structure: StructureGraph) -> bool:
    seen: set[int] = set()
    for r, s in structure.bonds:
        if r in seen or s in seen:
            return False
        seen.update((r, s))
    return True


@dataclass(frozen=True)
class CodonScores:
    entries: Mapping = field(default_factory=dict)
    default: Fraction = Fraction(0)
    forbidden: frozenset = frozenset()

    def __call__(self, codon: str) -> Fraction:
        return self.entries.get(codon, self.default)


_ZERO_SCORES = CodonScores()


@dataclass(frozen=True)
class ScoreTable:
    """Per-codon score functions; codons without a record score 0 everywhere."""

    tables: Mapping = field(default_factory=dict)

    def __getitem__(self, i: int) -> CodonScores:
        return self.tables.get(i, _ZERO_SCORES)


class MrsoInstance:
    """Alphabet, structure graph and score tables, with the implied graph cached."""

    def __init__(self, alphabet: Alphabet, structure: StructureGraph, scores: ScoreTable | None = None):
        if structure.codon_length != alphabet.codon_length:
            raise InstanceError("structure and alphabet disagree on codon_length")
        self.alphabet = alphabet
        self.structure = structure
        self.scores = scores if scores is not None else ScoreTable()
        for i, table in self.scores.tables.items():
            if not 1 <= i <= structure.n:
                raise InstanceError(f"score record for codon {i} out of range 1..{structure.n}")
            for codon in list(table.entries) + list(table.forbidden):
                try:
                    alphabet.check_codon(codon)
                except MalformedLabeling as exc:
                    raise InstanceError(f"codon {i}: {exc}") from None
        self.implied = derive_implied(structure, alphabet.codon_length)

    @property
    def n(self) -> int:
        return self.structure.n

    def __repr__(self) -> str:
        return (f"MrsoInstance(n={self.n}, symbols={''.join(self.alphabet.symbols)!r}, "
                f"codon_length={self.alphabet.codon_length}, bonds={len(self.structure.bonds)})")

    def __eq__(self, other) -> bool:
        if not isinstance(other, MrsoInstance):
            return NotImplemented
        return instance_to_dict(self) == instance_to_dict(other)


def score_labeling(instance: MrsoInstance, labeling: Sequence[str]):
    """Total score of a codon labeling, or INFEASIBLE if it breaks a constraint."""
    alphabet = instance.alphabet
    if len(labeling) != instance.n:
        raise MalformedLabeling(f"labeling has {len(labeling)} codons, instance has {instance.n}")
    for codon in labeling:
        alphabet.check_codon(codon)
    implied = instance.implied
    for (i, j), patterns in implied.edge_bonds.items():
        if not pair_satisfies_gamma(labeling[i - 1], labeling[j - 1], patterns, alphabet):
            return INFEASIBLE
    for i, pairs in implied.intra.items():
        codon = labeling[i - 1]
        if not pair_satisfies_gamma(codon, codon, pairs, alphabet):
            return INFEASIBLE
    total = Fraction(0)
    for i, codon in enumerate(labeling, start=1):
        table = instance.scores[i]
        if codon in table.forbidden:
            return INFEASIBLE
        total += table(codon)
    return total


# ---------------------------------------------------------------- JSON

def instance_to_dict(instance: MrsoInstance) -> dict:
    a = instance.alphabet
    scores = []
    for i in sorted(instance.scores.tables):
        t = instance.scores.tables[i]
        scores.append({
            "codon_index": i,
            "entries": [{"codon": c, "value": format_rational(v)} for c, v in sorted(t.entries.items())],
            "default": format_rational(t.default),
            "forbidden": sorted(t.forbidden),
        })
    return {
        "alphabet": {
            "symbols": list(a.symbols),
            "gamma": [list(p) for p in sorted(a.gamma)],
            "codon_length": a.codon_length,
        },
        "n": instance.n,
        "bonds": [list(b) for b in sorted(instance.structure.bonds)],
        "scores": scores,
    }


def instance_from_dict(doc: Mapping) -> MrsoInstance:
    try:
        adoc = doc["alphabet"]
        alphabet = Alphabet(
            symbols=tuple(adoc["symbols"]),
            gamma=frozenset(tuple(p) for p in adoc["gamma"]),
            codon_length=int(adoc.get("codon_length", 3)),
        )
        n = int(doc["n"])
        bonds = []
        for b in doc.get("bonds", []):
            if len(b) != 2:
                raise InstanceError(f"bond {b!r} must have two endpoints")
            bonds.append((int(b[0]), int(b[1])))
        if len(set((min(b), max(b)) for b in bonds)) != len(bonds):
            raise InstanceError("duplicate bond")
        structure = StructureGraph(n, frozenset(bonds), alphabet.codon_length)
        tables = {}
        for rec in doc.get("scores", []):
            i = int(rec["codon_index"])
            if i in tables:
                raise InstanceError(f"duplicate score record for codon {i}")
            entries = {}
            for e in rec.get("entries", []):
                if e["codon"] in entries:
                    raise InstanceError(f"codon {i}: duplicate entry {e['codon']!r}")
                entries[e["codon"]] = parse_rational(e["value"])
            tables[i] = CodonScores(
                entries=entries,
                default=parse_rational(rec.get("default", 0)),
                forbidden=frozenset(rec.get("forbidden", [])),
            )
    except (KeyError, TypeError) as exc:
        raise InstanceError(f"instance document is missing or mistypes a field: {exc}") from None
    return MrsoInstance(alphabet, structure, ScoreTable(tables))


def load_instance(path) -> MrsoInstance:
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise InstanceError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    try:
        return instance_from_dict(doc)
    except InstanceError as exc:
        raise InstanceError(f"{path}: {exc}") from None


def dump_instance(instance: MrsoInstance, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(instance_to_dict(instance), fh, indent=2, sort_keys=True)
        fh.write("\n")
