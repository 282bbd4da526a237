"""The ``etope`` command line: set I/O, operation dispatch, checks, reduction,
plotting, demos, and benchmarks.

Exit codes: 0 success (verdicts like "empty" are data, not failures);
2 malformed inputs or flags; 3 solver INCONCLUSIVE; 4 I/O failure.
"""

import argparse
import json
import sys

import numpy as np

from . import ops, reduce as reduce_mod
from .apps.bench import emptiness_bench, emptiness_rows_to_csv, reduction_heuristic_bench
from .apps.fault import FaultScenario, fault_detection_sim
from .apps.path import RobotScenario, path_verification_sim
from .io import SchemaError, canonical_dumps, read_set, write_set
from .solve import SolverConfig, Verdict, contains_point, default_config, is_empty
from .viz import emit_polygon, sample_boundary_coeff, sample_boundary_ray


class Inconclusive(Exception):
    pass


def _print_json(payload):
    sys.stdout.write(canonical_dumps(payload) + "\n")


def _result_payload(result):
    return {
        "residual": float(result.residual),
        "iterations": int(result.iterations),
        "verdict": result.verdict.value,
    }


def _solver_config(args):
    cfg = default_config()
    tol = getattr(args, "tol", None)
    iters = getattr(args, "max_iters", None)
    if tol is not None or iters is not None:
        cfg = SolverConfig(
            tol_feas=tol if tol is not None else cfg.tol_feas,
            max_iters=iters if iters is not None else cfg.max_iters,
        )
    return cfg


def _load_matrix_file(path, key):
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as err:
            raise SchemaError("", f"not valid JSON: {err}") from err
    if isinstance(data, list):
        return np.asarray(data, dtype=float), None
    if isinstance(data, dict) and key in data:
        T = np.asarray(data[key], dtype=float)
        t = np.asarray(data["t"], dtype=float) if "t" in data else None
        return T, t
    raise SchemaError("", f'matrix file must be a 2-D array or an object with "{key}"')


# ---------------------------------------------------------------------------
# subcommands


def _cmd_validate(args):
    try:
        read_set(args.file)
    except SchemaError as err:
        for part in str(err).split("; "):
            print(part, file=sys.stderr)
        return 2
    _print_json({"valid": True})
    return 0


def _cmd_op(args):
    E1 = read_set(args.a)
    if args.operation == "affine":
        T, t = _load_matrix_file(args.matrix, "T")
        out = ops.affine_map(E1, T, t)
    elif args.operation == "lift":
        out = ops.lift(E1)
    elif args.operation == "to-cpz":
        cpz = ops.to_cpz(E1)
        payload = {
            "c": cpz.c, "G": cpz.G, "X": cpz.X,
            "A": cpz.A, "b": cpz.b, "D": cpz.D,
        }
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(canonical_dumps(payload) + "\n")
        return 0
    else:
        if args.b is None:
            raise SchemaError("", f"operation {args.operation!r} needs two operands")
        E2 = read_set(args.b)
        if args.operation == "sum":
            out = ops.minkowski_sum(E1, E2)
        elif args.operation == "product":
            out = ops.cartesian_product(E1, E2)
        elif args.operation == "intersect":
            out = ops.intersect(E1, E2)
        elif args.operation == "intersect-gen":
            R, _ = _load_matrix_file(args.matrix, "R")
            out = ops.intersect_generalized(E1, E2, R)
        elif args.operation == "hull":
            out = ops.convex_hull_overapprox(E1, E2)
        else:  # pragma: no cover - argparse restricts choices
            raise SchemaError("", f"unknown operation {args.operation!r}")
    write_set(out, args.output)
    return 0


def _cmd_check(args):
    E = read_set(args.file)
    cfg = _solver_config(args)
    if args.kind == "empty":
        empty, result = is_empty(E, config=cfg)
        payload = {"empty": bool(empty), **_result_payload(result)}
    else:
        if not args.point:
            raise SchemaError("", "check contains requires --point")
        point = np.array([float(v) for v in args.point.split(",")])
        contained, result = contains_point(E, point, config=cfg)
        payload = {"contains": bool(contained), **_result_payload(result)}
    _print_json(payload)
    if result.verdict == Verdict.INCONCLUSIVE:
        raise Inconclusive()
    return 0


def _area_ratio(before, after):
    if before.dim != 2:
        return None
    try:
        a0 = sample_boundary_ray(before, 64, seed=0)
        a1 = sample_boundary_ray(after, 64, seed=0)
    except ValueError:
        return None
    from .viz import polygon_area

    denom = polygon_area(a0.points, a0.hull_order)
    if denom <= 0.0:
        return None
    return polygon_area(a1.points, a1.hull_order) / denom


def _cmd_reduce(args):
    E = read_set(args.file)
    method = args.method
    if method == "basic2":
        out = reduce_mod.reduce_basic_2(E)
    elif method == "mvoe":
        out = reduce_mod.reduce_2etope(E, int(args.target))
    elif method == "pop-box":
        out = reduce_mod.reduce_pop_box(E, int(args.target))
    elif method == "lift-reduce":
        out = reduce_mod.lift_then_reduce(E)
    elif method == "drop-constraint":
        out = reduce_mod.eliminate_constraint(E, int(args.target))
    else:  # pragma: no cover
        raise SchemaError("", f"unknown method {method!r}")
    write_set(out, args.output)
    report = {
        "generators_before": E.num_generators,
        "generators_after": out.num_generators,
        "constraints_after": out.num_constraints,
        "area_ratio": _area_ratio(E, out) if not args.no_area else None,
    }
    _print_json(report)
    return 0


def _cmd_plot(args):
    E = read_set(args.file)
    if args.method == "ray":
        sample = sample_boundary_ray(E, args.samples, seed=args.seed)
    else:
        sample = sample_boundary_coeff(E, args.samples, seed=args.seed)
    emit_polygon(sample, args.format, args.output)
    return 0


def _cmd_demo(args):
    if args.config:
        with open(args.config, "r", encoding="utf-8") as fh:
            try:
                cfg = json.load(fh)
            except json.JSONDecodeError as err:
                raise SchemaError("", f"not valid JSON: {err}") from err
    else:
        cfg = {}
    if args.which == "fault":
        report = fault_detection_sim(FaultScenario.from_config(cfg)).to_dict()
    else:
        report = path_verification_sim(RobotScenario.from_config(cfg)).to_dict()
    with open(args.output, "w", encoding="utf-8") as fh:
        fh.write(canonical_dumps(report) + "\n")
    return 0


def _cmd_bench(args):
    if args.which == "emptiness":
        dims = (args.dim,) if args.dim else (2, 8, 14)
        rows = emptiness_bench(
            dims=dims, m_max=args.m_max, trials=args.trials, jobs=args.jobs
        )
        text = emptiness_rows_to_csv(rows)
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
        bad = [r for r in rows if r.correct != r.trials]
        _print_json({"rows": len(rows), "all_correct": not bad})
    else:
        study = reduction_heuristic_bench(
            n=args.dim or 8, trials=args.trials, jobs=args.jobs
        )
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(study.to_csv())
        _print_json(
            {
                "r_squared": study.r_squared,
                "tie": study.tie,
                "heuristic_mean_s": study.heuristic_mean_s,
                "mvoe_mean_s": study.mvoe_mean_s,
            }
        )
    return 0


# ---------------------------------------------------------------------------
# parser


def build_parser():
    parser = argparse.ArgumentParser(
        prog="etope", description="Ellipsotope set algebra toolbox"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    v = sub.add_parser("validate", help="check a set file against the schema")
    v.add_argument("file")
    v.set_defaults(func=_cmd_validate)

    op = sub.add_parser("op", help="apply a set operation")
    op.add_argument(
        "operation",
        choices=["sum", "product", "intersect", "intersect-gen", "affine",
                 "hull", "lift", "to-cpz"],
    )
    op.add_argument("a")
    op.add_argument("b", nargs="?", default=None)
    op.add_argument("--matrix", help="JSON matrix file for affine/intersect-gen")
    op.add_argument("-o", "--output", required=True)
    op.set_defaults(func=_cmd_op)

    ck = sub.add_parser("check", help="emptiness or point containment")
    ck.add_argument("kind", choices=["empty", "contains"])
    ck.add_argument("file")
    ck.add_argument("--point", help='comma-separated point, e.g. "1.0,0.5"')
    ck.add_argument("--tol", type=float, default=None)
    ck.add_argument("--max-iters", type=int, default=None, dest="max_iters")
    ck.set_defaults(func=_cmd_check)

    rd = sub.add_parser("reduce", help="order reduction")
    rd.add_argument("file")
    rd.add_argument(
        "--method",
        required=True,
        choices=["basic2", "mvoe", "pop-box", "lift-reduce", "drop-constraint"],
    )
    rd.add_argument(
        "--target", type=int, default=1,
        help="components for mvoe, removals for pop-box, row for drop-constraint",
    )
    rd.add_argument("--no-area", action="store_true", help="skip the area ratio")
    rd.add_argument("-o", "--output", required=True)
    rd.set_defaults(func=_cmd_reduce)

    pl = sub.add_parser("plot", help="sample the boundary and write a polygon")
    pl.add_argument("file")
    pl.add_argument("--samples", type=int, default=64)
    pl.add_argument("--method", choices=["ray", "coeff"], default="ray")
    pl.add_argument("--seed", type=int, default=0)
    pl.add_argument("--format", choices=["csv", "svg"], default="csv")
    pl.add_argument("-o", "--output", required=True)
    pl.set_defaults(func=_cmd_plot)

    dm = sub.add_parser("demo", help="run an end-to-end demonstration")
    dm.add_argument("which", choices=["fault", "path"])
    dm.add_argument("--config", default=None)
    dm.add_argument("-o", "--output", required=True)
    dm.set_defaults(func=_cmd_demo)

    bn = sub.add_parser("bench", help="run a benchmark")
    bn.add_argument("which", choices=["emptiness", "mvoe-heuristic"])
    bn.add_argument("--dim", type=int, default=None)
    bn.add_argument("--trials", type=int, default=10)
    bn.add_argument("--m-max", type=int, default=20, dest="m_max")
    bn.add_argument("--jobs", type=int, default=1)
    bn.add_argument("-o", "--output", required=True)
    bn.set_defaults(func=_cmd_bench)

    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except Inconclusive:
        print("solver verdict inconclusive", file=sys.stderr)
        return 3
    except (SchemaError, ValueError, TypeError, IndexError, KeyError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except OSError as err:
        print(f"i/o error: {err}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
