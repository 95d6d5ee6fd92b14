"""Exact MRSO solving on implied structure graphs given as clique-width expressions."""

from .builders import (
    PlainGraph,
    cograph_expression,
    mis_reduction,
    naive_expression,
    random_instance,
    tree_expression,
)
from .compare import ComparisonResult, Relation, compare_instances
from .cwexpr import (
    AddEdges,
    LabeledGraph,
    Leaf,
    Relabel,
    Union,
    evaluate,
    format_expression,
    parse_expression,
    validate_against,
    width,
)
from .errors import (
    BudgetExceeded,
    DegreeTooHigh,
    ExpressionMismatch,
    ExpressionSyntaxError,
    HeterogeneousEta,
    InvalidExpression,
    MrsoError,
    NotCograph,
    NotTree,
)
from .instance import (
    INFEASIBLE,
    Alphabet,
    CodonScores,
    MrsoInstance,
    ScoreTable,
    StructureGraph,
    derive_implied,
    is_d1,
    load_instance,
    pair_satisfies_gamma,
    score_labeling,
)
from .solver import Solution, brute_force, solve

__version__ = "0.1.0"
