from fractions import Fraction

import pytest

from corpus import oracle_corpus
from mrso.builders import PlainGraph, mis_reduction, naive_expression
from mrso.compare import Relation, SideError, compare_instances, compare_values
from mrso.cwexpr import parse_expression
from mrso.instance import INFEASIBLE, Alphabet, CodonScores, MrsoInstance, ScoreTable, StructureGraph
from mrso.solver import brute_force

RNA = Alphabet(("A", "C", "G", "U"), {("C", "G"), ("A", "U")}, 3)
XY = Alphabet(("x", "y"), {("x", "y")}, 1)


def acg():
    inst = MrsoInstance(RNA, StructureGraph(1, frozenset(), 3), ScoreTable({1: CodonScores({"ACG": Fraction(1)})}))
    return inst, parse_expression("v(1,1)")


def triangle():
    inst = MrsoInstance(XY, StructureGraph(3, frozenset({(1, 2), (1, 3), (2, 3)}), 1))
    return inst, parse_expression("eta(1,2, u( rho(2->1, eta(1,2, u(v(1,1), v(2,2)))), v(3,2)))")


def mis(g):
    inst = mis_reduction(g)
    return inst, naive_expression(PlainGraph(inst.implied.vertices, inst.implied.edges))


def test_reflexive():
    r = compare_instances(acg(), acg())
    assert r.relation is Relation.EQUAL and r.le and r.eq and r.exact


def test_infeasible_is_below():
    r = compare_instances(triangle(), acg())
    assert r.relation is Relation.LESS and r.le and not r.eq
    assert r.to_dict() == {"left": "infeasible", "right": "1/1", "relation": "less", "le": True,
                           "eq": False, "exact": True}
    assert compare_instances(triangle(), triangle()).eq


def test_mis_p3_equals_c5():
    p3 = PlainGraph.from_edges(3, {(1, 2), (2, 3)})
    c5 = PlainGraph.from_edges(5, {(i, i % 5 + 1) for i in range(1, 6)})
    assert compare_instances(mis(p3), mis(c5), parallel=True).relation is Relation.EQUAL


def test_compare_values_order():
    assert compare_values(INFEASIBLE, Fraction(-10**9)) is Relation.LESS
    assert compare_values(Fraction(1, 3), Fraction(1, 2)) is Relation.LESS
    assert compare_values(Fraction(2, 4), Fraction(1, 2)) is Relation.EQUAL
    assert compare_values(Fraction(0), INFEASIBLE) is Relation.GREATER


def test_side_error_names_the_side():
    bad = (acg()[0], parse_expression("u(v(1,1), v(2,1))"))
    with pytest.raises(SideError) as info:
        compare_instances(acg(), bad)
    assert info.value.side == "right"


def test_require_d1():
    shared = MrsoInstance(XY, StructureGraph(3, frozenset({(1, 2), (1, 3)}), 1))
    expr = naive_expression(PlainGraph(shared.implied.vertices, shared.implied.edges))
    assert compare_instances((shared, expr), acg()).relation is Relation.LESS
    with pytest.raises(SideError) as info:
        compare_instances((shared, expr), acg(), require_d1=True)
    assert info.value.side == "left"


PAIRS = list(zip(oracle_corpus(30, seed=77), oracle_corpus(30, seed=78)))


@pytest.mark.parametrize("a, b", PAIRS)
def test_matches_brute_force_and_antisymmetry(a, b):
    r = compare_instances(a, b)
    expected = compare_values(brute_force(a[0]).value, brute_force(b[0]).value)
    assert r.relation is expected
    assert compare_instances(b, a).relation is r.relation.reversed()
    assert r.le == (r.relation is not Relation.GREATER)
    assert r.eq == (r.relation is Relation.EQUAL)
