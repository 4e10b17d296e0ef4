"""Command-line front end.

Each invocation prints one JSON document on stdout. Exit status is 0 when
the command succeeds, 1 when it runs but the tested property is false
(not a metric, not embeddable, not homogeneous, ...), and 2 for bad input.
"""
from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Optional, Sequence

from . import serialize as ser
from .core_metric import DEFAULT_TOL, validate_metric
from .datasets import rpn_triples
from .embed import Circle, Euclidean, Hyperbolic, Sphere, TreeValence, embed
from .errors import AllsetError, NotATreeMetric, ValenceExhausted
from .extend import copy_map, extend_all, verify_isometry
from .fingerprint import FingerprintVector, fingerprint_finite, member, nonclosed_demo
from .homog import PartialMap, extends_to_global, is_all_set_homogeneous, is_k_homogeneous
from .ramsey import bin_distances, equilateral_subset, maximal_equilateral_extend, monochromatic_clique
from .tree import TreeLocation, build_realization, max_degree

OK, PROPERTY_FALSE, INPUT_ERROR = 0, 1, 2
_STATUS = {OK: "ok", PROPERTY_FALSE: "property-false", INPUT_ERROR: "input-error"}


@dataclass
class CommandResult:
    exit_code: int
    payload: Optional[Any] = None
    message: Optional[str] = None

    @property
    def status(self) -> str:
        return _STATUS[self.exit_code]


class _Parser(argparse.ArgumentParser):
    """Argument parser that raises instead of exiting, so :func:`run` stays pure."""

    def error(self, message):
        raise _UsageError(f"{self.prog}: {message}")


class _UsageError(Exception):
    pass


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _ints(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _space_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--space", required=True, choices=["euclidean", "sphere", "hyperbolic", "circle", "tree"])
    p.add_argument("--dim", type=int)
    p.add_argument("--radius", type=float, default=1.0)
    p.add_argument("--scale", type=float, default=1.0)
    p.add_argument("--length", type=float)
    p.add_argument("--valence", type=int)


def _space(args):
    need = {"euclidean": "dim", "sphere": "dim", "hyperbolic": "dim", "circle": "length", "tree": "valence"}[args.space]
    if getattr(args, need) is None:
        raise _UsageError(f"--space {args.space} requires --{need}")
    if args.space == "euclidean":
        return Euclidean(args.dim)
    if args.space == "sphere":
        return Sphere(args.dim, args.radius)
    if args.space == "hyperbolic":
        return Hyperbolic(args.dim, args.scale)
    if args.space == "circle":
        return Circle(args.length)
    return TreeValence(args.valence)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="allset", description="Metric geometry of finite spaces, trees and homogeneity.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("validate", help="check the metric axioms")
    p.add_argument("matrix")

    p = sub.add_parser("embed", help="decide isometric embedding into a model space")
    _space_args(p)
    p.add_argument("matrix")

    p = sub.add_parser("tree", help="tree realizations")
    tree_sub = p.add_subparsers(dest="tree_command", required=True, parser_class=_Parser)
    b = tree_sub.add_parser("build", help="minimal tree realizing a tree metric")
    b.add_argument("--valence", type=int)
    b.add_argument("matrix")

    p = sub.add_parser("homog", help="k-point or all-set homogeneity")
    p.add_argument("--k", type=int)
    p.add_argument("matrix")

    p = sub.add_parser("fingerprint", help="distance vectors of n-point configurations")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--mode", choices=["tuples", "injective"], default="tuples")
    p.add_argument("matrix")

    p = sub.add_parser("member", help="membership of a distance vector in a model space fingerprint")
    _space_args(p)
    p.add_argument("--vector", type=_floats, required=True)

    p = sub.add_parser("extend", help="extend a partial isometry of a tree over more points")
    p.add_argument("--source", required=True)
    p.add_argument("--map", required=True)
    p.add_argument("--points", type=_ints, required=True)
    p.add_argument("--valence", type=int)

    p = sub.add_parser("ramsey", help="near-equilateral and equilateral subsets")
    p.add_argument("which", choices=["near", "equi"])
    p.add_argument("--delta", type=float)
    p.add_argument("--r", type=float)
    p.add_argument("--tol", type=float, default=0.0)
    p.add_argument("matrix")

    p = sub.add_parser("demo", help="bundled demonstrations")
    demo_sub = p.add_subparsers(dest="demo", required=True, parser_class=_Parser)
    d = demo_sub.add_parser("nonclosed", help="comb vectors converging outside a tree fingerprint")
    d.add_argument("--valence", type=int, default=3)
    d.add_argument("--k", type=int, default=4)
    d.add_argument("--eps", type=_floats, default=[0.1, 0.01, 0.001])
    d.add_argument("--csv")
    demo_sub.add_parser("rpn-triples", help="isometric triples of projective lines that no isometry swaps")
    return parser


def _validate(args) -> CommandResult:
    m = ser.load_matrix(args.matrix)
    r = validate_metric(m, DEFAULT_TOL)
    doc = {"n": m.n, "kind": m.kind, **ser.validation_to_json(r)}
    return CommandResult(OK if r.ok else PROPERTY_FALSE, doc)


def _embed(args) -> CommandResult:
    space = _space(args)
    m = ser.load_matrix(args.matrix)
    r = embed(m, space, DEFAULT_TOL)
    doc = {"space": ser.space_to_json(space), **ser.embed_result_to_json(r)}
    return CommandResult(OK if r.embeddable else PROPERTY_FALSE, doc)


def _tree_build(args) -> CommandResult:
    m = ser.load_matrix(args.matrix)
    try:
        t = build_realization(m, DEFAULT_TOL, valence_budget=args.valence)
    except NotATreeMetric as exc:
        return CommandResult(PROPERTY_FALSE, {"tree": None, "certificate": str(exc)})
    deg = max_degree(t)
    doc = {"tree": ser.tree_to_json(t), "max_degree": deg, "certificate": None}
    if args.valence is not None and deg > args.valence:
        doc["certificate"] = f"degree {deg} branch point required"
        return CommandResult(PROPERTY_FALSE, doc)
    return CommandResult(OK, doc)


def _homog(args) -> CommandResult:
    m = ser.load_matrix(args.matrix)
    r = is_all_set_homogeneous(m, DEFAULT_TOL) if args.k is None else is_k_homogeneous(m, args.k, DEFAULT_TOL)
    return CommandResult(OK if r.verdict else PROPERTY_FALSE, ser.report_to_json(r))


def _fingerprint(args) -> CommandResult:
    m = ser.load_matrix(args.matrix)
    return CommandResult(OK, ser.fingerprint_set_to_json(fingerprint_finite(m, args.n, args.mode, DEFAULT_TOL)))


def _member(args) -> CommandResult:
    space = _space(args)
    v = FingerprintVector.from_entries(args.vector)
    r = member(v, space, DEFAULT_TOL)
    return CommandResult(OK if r.member else PROPERTY_FALSE, ser.membership_to_json(v, space, r))


def _extend(args) -> CommandResult:
    source = ser.tree_from_json(ser.load_json(args.source))
    if args.valence is not None:
        source = type(source)(source.vertices, source.edges, args.valence)
    domain, images = ser.map_from_json(ser.load_json(args.map))
    for v in args.points:
        if not 0 <= v < len(source.vertices):
            raise _UsageError(f"point {v} is not a vertex of the source tree")
    p = copy_map(source, domain, images, DEFAULT_TOL)
    try:
        q, trace = extend_all(p, [TreeLocation.at(v) for v in args.points], DEFAULT_TOL)
    except ValenceExhausted as exc:
        return CommandResult(PROPERTY_FALSE, {"extended": False, "certificate": str(exc)})
    ok, dev, pair = verify_isometry(q, DEFAULT_TOL)
    doc = {
        "extended": True,
        "map": ser.map_to_json(q),
        "target": ser.tree_to_json(q.target),
        "trace": ser.trace_to_json(trace),
        "verify": {"ok": ok, "deviation": dev, "pair": None if pair is None else list(pair)},
    }
    return CommandResult(OK if ok else PROPERTY_FALSE, doc)


def _ramsey(args) -> CommandResult:
    m = ser.load_matrix(args.matrix)
    if args.which == "near":
        if args.delta is None:
            raise _UsageError("ramsey near requires --delta")
        c = bin_distances(m, args.delta, DEFAULT_TOL)
        return CommandResult(OK, {"coloring": ser.coloring_to_json(c), "clique": ser.clique_to_json(monochromatic_clique(c))})
    if args.r is None:
        raise _UsageError("ramsey equi requires --r")
    best = equilateral_subset(m, args.r, args.tol, DEFAULT_TOL)
    greedy = maximal_equilateral_extend(m, args.r, (), args.tol, DEFAULT_TOL)
    return CommandResult(OK, {"r": args.r, "tol": args.tol, "maximum": list(best), "maximal_greedy": list(greedy)})


def _demo(args) -> CommandResult:
    if args.demo == "nonclosed":
        r = nonclosed_demo(args.valence, args.k, args.eps, DEFAULT_TOL)
        if args.csv:
            try:
                Path(args.csv).write_text(ser.nonclosed_to_csv(r), encoding="utf-8")
            except OSError as exc:
                raise _UsageError(f"cannot write {args.csv}: {exc.strerror}")
        return CommandResult(OK if r.gap_exhibited else PROPERTY_FALSE, ser.nonclosed_to_json(r))
    data = rpn_triples()
    m = data.matrix
    extension = extends_to_global(m, PartialMap(data.triple_a, data.triple_b), DEFAULT_TOL)
    doc = {
        "matrix": ser.matrix_to_json(m),
        "vectors": data.vectors.tolist(),
        "triple_a": list(data.triple_a),
        "triple_b": list(data.triple_b),
        "triple_map_extends": extension is not None,
        "homogeneity": ser.report_to_json(is_all_set_homogeneous(m, DEFAULT_TOL)),
    }
    return CommandResult(OK, doc)


_DISPATCH = {
    "validate": _validate,
    "embed": _embed,
    "tree": _tree_build,
    "homog": _homog,
    "fingerprint": _fingerprint,
    "member": _member,
    "extend": _extend,
    "ramsey": _ramsey,
    "demo": _demo,
}


def run(argv: Sequence[str]) -> CommandResult:
    """Parse ``argv`` and execute it; never raises for user errors."""
    try:
        args = build_parser().parse_args(list(argv))
        return _DISPATCH[args.command](args)
    except (_UsageError, AllsetError) as exc:
        return CommandResult(INPUT_ERROR, message=str(exc))


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    if any(a in ("-h", "--help") for a in argv):
        build_parser().parse_args(list(argv))
    result = run(argv)
    if result.exit_code == INPUT_ERROR:
        print(f"error: {result.message}", file=sys.stderr)
    else:
        sys.stdout.write(ser.dumps(result.payload))
    return result.exit_code


if __name__ == "__main__":
    sys.exit(main())
