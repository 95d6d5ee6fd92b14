import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mrso.cwexpr import (
    AddEdges,
    Leaf,
    Relabel,
    Union,
    evaluate,
    format_expression,
    leaves,
    parse_expression,
    validate_against,
    width,
)
from mrso.builders import PlainGraph
from mrso.errors import ExpressionSyntaxError, InvalidExpression

X1_AST = AddEdges(1, 2, Union(Relabel(2, 1, AddEdges(1, 2, Union(Leaf(1, 1), Leaf(2, 2)))), Leaf(3, 2)))


def test_parse_leaf():
    assert parse_expression("v(1,1)") == Leaf(1, 1)


def test_parse_x1(x1_text):
    assert parse_expression(x1_text) == X1_AST


def test_format_examples():
    assert format_expression(Leaf(3, 2)) == "v(3,2)"
    assert format_expression(Union(Leaf(1, 1), Leaf(2, 1))) == "u(v(1,1),v(2,1))"
    assert format_expression(X1_AST) == "eta(1,2,u(rho(2->1,eta(1,2,u(v(1,1),v(2,2)))),v(3,2)))"


def test_whitespace_insensitive():
    assert parse_expression(" rho ( 2 -> 1 ,\n v( 4 , 2 ) ) ") == Relabel(2, 1, Leaf(4, 2))


@pytest.mark.parametrize(
    "text",
    ["eta(1,1, v(1,1))", "rho(3->3, v(1,1))", "v(1,0)", "u(v(1,1), v(1,2))", "v(0,1)"],
)
def test_rule_violations(text):
    with pytest.raises(InvalidExpression):
        parse_expression(text)


@pytest.mark.parametrize(
    "text, position",
    [("v(1,1) x", 7), ("v(1,)", 4), ("rho(1 2, v(1,1))", 6), ("w(1,1)", 0), ("u(v(1,1))", 8), ("v(1,1", 5), ("", 0)],
)
def test_syntax_errors_report_position(text, position):
    with pytest.raises(ExpressionSyntaxError) as info:
        parse_expression(text)
    assert info.value.position == position


def test_evaluate_x1_triangle(x1_text):
    g = evaluate(parse_expression(x1_text))
    assert g.vertices == {1, 2, 3}
    assert g.edges == {(1, 2), (1, 3), (2, 3)}
    assert g.labels == {1: 1, 2: 1, 3: 2}


def test_evaluate_x2_path(x2_text):
    g = evaluate(parse_expression(x2_text))
    assert g.edges == {(1, 2), (2, 5), (4, 5), (3, 4)}
    assert g.labels == {1: 2, 2: 2, 3: 2, 4: 2, 5: 3}


def test_evaluate_single_leaf():
    g = evaluate(Leaf(7, 4))
    assert g.vertices == {7} and g.labels == {7: 4} and not g.edges


def test_eta_without_vertices_is_noop():
    assert evaluate(AddEdges(5, 6, Leaf(1, 1))).edges == frozenset()


def test_width_examples(x2_text):
    assert width(Leaf(1, 1)) == 1
    assert width(parse_expression(x2_text)) == 3
    assert width(Relabel(5, 1, Leaf(1, 1))) == 5


def test_validate_against(x1_text):
    x1 = parse_expression(x1_text)
    assert validate_against(x1, PlainGraph.from_edges(3, {(1, 2), (2, 3), (1, 3)}))
    assert not validate_against(x1, PlainGraph.from_edges(3, {(1, 2), (2, 3)}))
    assert validate_against(Leaf(1, 1), PlainGraph.from_edges(1, ()))


def test_deep_expression_has_no_recursion_limit():
    # path 1-2-...-3000, the newest vertex always carries label 2
    expr = Leaf(1, 2)
    for v in range(2, 3001):
        expr = Relabel(3, 2, Relabel(2, 1, AddEdges(2, 3, Union(expr, Leaf(v, 3)))))
    text = format_expression(expr)
    parsed = parse_expression(text)
    assert format_expression(parsed) == text
    g = evaluate(parsed)
    assert g.edges == {(v, v + 1) for v in range(1, 3000)}


# ---------------------------------------------------------------- properties

@st.composite
def expressions(draw, max_leaves=8, max_label=4):
    n = draw(st.integers(1, max_leaves))
    ids = draw(st.permutations(list(range(1, n + 1))))
    labels = st.integers(1, max_label)
    pool = [Leaf(v, draw(labels)) for v in ids]
    while len(pool) > 1 or draw(st.booleans()):
        op = draw(st.sampled_from(["u", "rho", "eta"] if len(pool) > 1 else ["rho", "eta"]))
        if op == "u":
            i = draw(st.integers(0, len(pool) - 2))
            pool[i:i + 2] = [Union(pool[i], pool[i + 1])]
            continue
        a = draw(labels)
        b = draw(labels.filter(lambda x: x != a))
        i = draw(st.integers(0, len(pool) - 1))
        pool[i] = Relabel(a, b, pool[i]) if op == "rho" else AddEdges(a, b, pool[i])
        if len(pool) == 1 and draw(st.integers(0, 3)) == 0:
            break
    return pool[0]


@given(expressions())
def test_round_trip(expr):
    assert parse_expression(format_expression(expr)) == expr


@given(expressions())
def test_semantics_invariants(expr):
    g = evaluate(expr)
    assert len(g.vertices) == len(leaves(expr))
    assert set(g.labels) == g.vertices
    assert all(u != v and u in g.vertices and v in g.vertices for u, v in g.edges)


@given(expressions(), st.integers(1, 4), st.integers(1, 4))
def test_relabel_and_eta_preserve_structure(expr, a, b):
    if a == b:
        return
    g = evaluate(expr)
    r = evaluate(Relabel(a, b, expr))
    assert r.vertices == g.vertices and r.edges == g.edges
    e = evaluate(AddEdges(a, b, expr))
    assert e.vertices == g.vertices and e.labels == g.labels
    assert g.edges <= e.edges


@settings(max_examples=50)
@given(expressions(max_leaves=4), expressions(max_leaves=4))
def test_union_commutes(x, y):
    shift = max(l.vertex for l in leaves(x))
    y = parse_expression(_shift_ids(format_expression(y), shift))
    a, b = evaluate(Union(x, y)), evaluate(Union(y, x))
    assert a.vertices == b.vertices and a.edges == b.edges and a.labels == b.labels


def _shift_ids(text, shift):
    import re

    return re.sub(r"v\((\d+),", lambda m: f"v({int(m.group(1)) + shift},", text)
