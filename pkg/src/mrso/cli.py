"""Command-line front end.  Every command prints one JSON document on stdout.

Exit status: 0 on success (Infeasible and NotCograph are answers), 1 on
input or validation errors, 2 when an internal consistency check fails.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import builders
from .compare import compare_instances
from .cwexpr import evaluate, format_expression, parse_expression, validate_against, width
from .errors import MrsoError, NotCograph, NotTree, WitnessError
from .instance import (
    Alphabet,
    INFEASIBLE,
    format_rational,
    instance_to_dict,
    is_d1,
    load_instance,
    score_labeling,
)
from .solver import DEFAULT_BUDGET, analyze_eta, brute_force, solve


class UsageError(MrsoError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _emit(doc) -> None:
    sys.stdout.write(json.dumps(doc, sort_keys=True) + "\n")


def load_expression(path):
    text = Path(path).read_text(encoding="utf-8")
    try:
        return parse_expression(text)
    except MrsoError as exc:
        raise MrsoError(f"{path}: {exc}") from None


def _pair_arg(text: str) -> tuple[str, str]:
    parts = text.split(",")
    if len(parts) != 2:
        raise UsageError(f"expected INSTANCE.json,EXPR.cwx, got {text!r}")
    return parts[0], parts[1]


def _write(prefix: str, suffix: str, content: str) -> str:
    path = f"{prefix}{suffix}"
    Path(path).write_text(content, encoding="utf-8")
    return path


# ---------------------------------------------------------------- commands

def cmd_solve(args) -> None:
    instance = load_instance(args.instance)
    sol = solve(instance, load_expression(args.expr), args.mode, threads=args.threads)
    doc = sol.to_dict()
    if not args.witness:
        doc["witness"] = None
    _emit(doc)


def cmd_brute(args) -> None:
    sol = brute_force(load_instance(args.instance), args.budget)
    doc = sol.to_dict()
    if not args.witness:
        doc["witness"] = None
    _emit(doc)


def cmd_compare(args) -> None:
    sides = []
    for pair in (args.a, args.b):
        inst_path, expr_path = _pair_arg(pair)
        sides.append((load_instance(inst_path), load_expression(expr_path)))
    result = compare_instances(sides[0], sides[1], args.mode, require_d1=args.d1, threads=args.threads)
    doc = result.to_dict()
    if args.relation:
        doc["answer"] = result.le if args.relation == "le" else result.eq
    _emit(doc)


def cmd_derive(args) -> None:
    instance = load_instance(args.instance)
    implied = instance.implied
    _emit({
        "n": instance.n,
        "edges": [list(e) for e in sorted(implied.edges)],
        "edge_bonds": [
            {"edge": list(e), "patterns": [list(p) for p in sorted(implied.edge_bonds[e])]}
            for e in sorted(implied.edges)
        ],
        "intra": [
            {"codon": i, "pairs": [list(p) for p in sorted(implied.intra[i])]} for i in sorted(implied.intra)
        ],
        "d1": is_d1(instance.structure),
    })


def cmd_expr_check(args) -> None:
    instance = load_instance(args.instance)
    expr = load_expression(args.expr)
    valid = validate_against(expr, instance.implied)
    doc = {"valid": valid, "width": width(expr), "uniform": None, "heterogeneous_eta": None}
    if valid:
        etas = analyze_eta(instance, expr)
        bad = sum(1 for info in etas.values() if not info.uniform)
        doc["uniform"] = bad == 0
        doc["heterogeneous_eta"] = bad
    _emit(doc)


def cmd_expr_eval(args) -> None:
    graph = evaluate(load_expression(args.expr))
    _emit({
        "vertices": sorted(graph.vertices),
        "labels": {str(v): graph.labels[v] for v in sorted(graph.vertices)},
        "edges": [list(e) for e in sorted(graph.edges)],
    })


def cmd_expr_width(args) -> None:
    _emit({"width": width(load_expression(args.expr))})


def cmd_score(args) -> None:
    instance = load_instance(args.instance)
    labeling = [c.strip() for c in args.labeling.split(",")] if args.labeling else []
    value = score_labeling(instance, labeling)
    _emit({"value": "infeasible" if value is INFEASIBLE else format_rational(value)})


_EXPR_BUILDERS = {
    "naive": builders.naive_expression,
    "cograph": builders.cograph_expression,
    "tree": builders.tree_expression,
}


def cmd_gen(args) -> None:
    kind = args.kind
    if kind in _EXPR_BUILDERS:
        graph = builders.read_edge_list(args.graph)
        try:
            expr = _EXPR_BUILDERS[kind](graph)
        except (NotCograph, NotTree) as exc:
            _emit({"result": "not-cograph" if isinstance(exc, NotCograph) else "not-tree", "reason": str(exc)})
            return
        text = format_expression(expr)
        doc = {"result": "ok", "width": width(expr)}
        if args.out_prefix:
            doc["expr"] = _write(args.out_prefix, ".cwx", text + "\n")
        else:
            doc["expression"] = text
        _emit(doc)
        return

    if kind == "mis":
        graph = builders.read_edge_list(args.graph)
        instance = builders.mis_reduction(graph)
        codon_graph = builders.PlainGraph(instance.implied.vertices, instance.implied.edges)
    else:
        gamma = frozenset(tuple(p) for p in (args.gamma.split(",") if args.gamma else []))
        if any(len(p) != 2 for p in gamma):
            raise UsageError("--gamma takes comma-separated symbol pairs such as CG,AU")
        alphabet = Alphabet(tuple(args.symbols), gamma, args.codon_length)
        instance = builders.random_instance(args.n, args.bonds, alphabet, args.seed)
        codon_graph = builders.PlainGraph(instance.implied.vertices, instance.implied.edges)
    expr_text = format_expression(builders.naive_expression(codon_graph))
    inst_text = json.dumps(instance_to_dict(instance), indent=2, sort_keys=True) + "\n"
    if args.out_prefix:
        _emit({
            "result": "ok",
            "instance": _write(args.out_prefix, ".json", inst_text),
            "expr": _write(args.out_prefix, ".cwx", expr_text + "\n"),
        })
    else:
        _emit({"result": "ok", "instance": instance_to_dict(instance), "expression": expr_text})


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mrso", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def mode_flags(p):
        p.add_argument("--mode", choices=("exact", "conservative"), default="exact")
        p.add_argument("--threads", type=int, default=1)

    p = sub.add_parser("solve", help="run the clique-width dynamic program")
    p.add_argument("--instance", required=True)
    p.add_argument("--expr", required=True)
    p.add_argument("--witness", action="store_true")
    mode_flags(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("brute", help="exhaustive enumeration")
    p.add_argument("--instance", required=True)
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    p.add_argument("--witness", action="store_true")
    p.set_defaults(func=cmd_brute)

    p = sub.add_parser("compare", help="compare two optima")
    p.add_argument("--a", required=True, metavar="INSTANCE,EXPR")
    p.add_argument("--b", required=True, metavar="INSTANCE,EXPR")
    p.add_argument("--relation", choices=("le", "eq"))
    p.add_argument("--d1", action="store_true", help="reject structure graphs that are not d1")
    mode_flags(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("derive", help="print the implied structure graph")
    p.add_argument("--instance", required=True)
    p.set_defaults(func=cmd_derive)

    p = sub.add_parser("expr-check", help="check an expression against an instance")
    p.add_argument("--instance", required=True)
    p.add_argument("--expr", required=True)
    p.set_defaults(func=cmd_expr_check)

    p = sub.add_parser("expr-eval", help="print graph(expr)")
    p.add_argument("--expr", required=True)
    p.set_defaults(func=cmd_expr_eval)

    p = sub.add_parser("expr-width", help="print the expression width")
    p.add_argument("--expr", required=True)
    p.set_defaults(func=cmd_expr_width)

    p = sub.add_parser("score", help="score one codon labeling")
    p.add_argument("--instance", required=True)
    p.add_argument("--labeling", required=True, help="comma-separated codons")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("gen", help="generate expressions and instances")
    p.add_argument("kind", choices=("naive", "cograph", "tree", "mis", "random"))
    p.add_argument("--graph")
    p.add_argument("--out-prefix")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--bonds", type=int, default=1)
    p.add_argument("--symbols", default="ACGU")
    p.add_argument("--gamma", default="CG,AU")
    p.add_argument("--codon-length", type=int, default=3)
    p.set_defaults(func=cmd_gen)
    return parser


def run(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if getattr(args, "kind", None) in ("naive", "cograph", "tree", "mis") and not args.graph:
            raise UsageError(f"gen {args.kind} needs --graph")
        args.func(args)
    except (WitnessError, AssertionError) as exc:
        print(f"mrso: internal error: {exc}", file=sys.stderr)
        return 2
    except (MrsoError, OSError, ValueError) as exc:
        print(f"mrso: error: {exc}", file=sys.stderr)
        return 1
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
