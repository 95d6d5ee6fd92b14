"""Comparing and Equality MRSO-d1: solve two instances and compare exact optima."""

from __future__ import annotations

import enum
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from .cwexpr import CwExpression
from .errors import InstanceError, MrsoError
from .instance import INFEASIBLE, MrsoInstance, format_rational, is_d1
from .solver import solve

__all__ = ["Relation", "ComparisonResult", "SideError", "compare_values", "compare_instances"]


class Relation(enum.Enum):
    LESS = "less"
    EQUAL = "equal"
    GREATER = "greater"

    def reversed(self) -> "Relation":
        return {Relation.LESS: Relation.GREATER, Relation.GREATER: Relation.LESS}.get(self, self)


class SideError(MrsoError):
    """Wraps a failure on one side of a comparison."""

    def __init__(self, side: str, error: Exception):
        super().__init__(f"{side} instance: {error}")
        self.side = side
        self.error = error


def compare_values(left, right) -> Relation:
    """Order two optima; INFEASIBLE sits below every rational and equals itself."""
    if left is INFEASIBLE or right is INFEASIBLE:
        if left is right:
            return Relation.EQUAL
        return Relation.LESS if left is INFEASIBLE else Relation.GREATER
    if left < right:
        return Relation.LESS
    if left > right:
        return Relation.GREATER
    return Relation.EQUAL


@dataclass(frozen=True)
class ComparisonResult:
    left_value: object
    right_value: object
    relation: Relation
    exact: bool

    @property
    def le(self) -> bool:
        return self.relation is not Relation.GREATER

    @property
    def eq(self) -> bool:
        return self.relation is Relation.EQUAL

    def to_dict(self) -> dict:
        def fmt(v):
            return "infeasible" if v is INFEASIBLE else format_rational(v)

        return {
            "left": fmt(self.left_value),
            "right": fmt(self.right_value),
            "relation": self.relation.value,
            "le": self.le,
            "eq": self.eq,
            "exact": self.exact,
        }


def compare_instances(
    a: tuple[MrsoInstance, CwExpression],
    b: tuple[MrsoInstance, CwExpression],
    mode: str = "exact",
    *,
    require_d1: bool = False,
    parallel: bool = False,
    threads: int = 1,
) -> ComparisonResult:
    """Answer "left <= right?" and "left = right?" for two MRSO optima.

    The two solves are independent; ``parallel`` runs them side by side.
    """
    sides = (("left", a), ("right", b))
    if require_d1:
        for side, (instance, _) in sides:
            if not is_d1(instance.structure):
                raise SideError(side, InstanceError("structure graph is not d1"))

    def run(side, pair):
        try:
            return solve(pair[0], pair[1], mode, threads=threads)
        except MrsoError as exc:
            raise SideError(side, exc) from exc

    if parallel:
        with ThreadPoolExecutor(2) as pool:
            futures = [pool.submit(run, side, pair) for side, pair in sides]
            left, right = (f.result() for f in futures)
    else:
        left, right = (run(side, pair) for side, pair in sides)
    return ComparisonResult(left.value, right.value, compare_values(left.value, right.value),
                            left.exact and right.exact)
