"""Command-line interface: ``metrickernel <subcommand> ...``.

Every subcommand prints one JSON document (or writes it to ``--output``)
containing a ``config_echo`` block with the parsed options. Exit status is 0
on success, 1 on a computational or input error and 2 on a usage error.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .cluster import adjusted_rand_score, compare_transform_clustering, leftmost_index, spectral_cluster
from .diagnostics import (
    DEFAULT_TOL,
    audit_bijectivity,
    audit_rank_preservation,
    check_negative_type,
    check_positive_definite,
    check_induced_kernel_biconditional,
)
from .exceptions import DegenerateInputError, InvalidInputError, SampleTooSmallError
from .matrices import Kind, PairwiseMatrix, distance_matrix, read_csv, write_csv
from .permutation import DEFAULT_PERMUTATIONS, permutation_test
from .stats import PipelineConfig, build_matrix, compute_stat
from .synth import RELATIONS, MethodConfig, SimulationSpec, estimate_power, generate
from .transforms import bijective, bijective_scaled, bijective_to_kernel, fixed_point_to_kernel, fixed_point_to_metric

_ERRORS = (InvalidInputError, DegenerateInputError, SampleTooSmallError, OSError)


def dumps(obj, indent: int = 2, _level: int = 0) -> str:
    """JSON with floats written to 17 significant digits; NaN/inf become null."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if obj is None:
        return "null"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if not math.isfinite(v):
            return "null"
        s = format(v, ".17g")
        if "e" not in s and "." not in s and "n" not in s:
            s += ".0"
        return s
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{dumps(str(k))}: {dumps(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if not seq:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in seq):
            return "[" + ", ".join(dumps(v, indent, _level + 1) for v in seq) + "]"
        return "[\n" + ",\n".join(pad + dumps(v, indent, _level + 1) for v in seq) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _bandwidth(text: str):
    if text == "median":
        return text
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bandwidth must be a positive number or 'median', got {text!r}")
    if not v > 0:
        raise argparse.ArgumentTypeError("bandwidth must be positive")
    return v


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def _add_matrix_options(p: argparse.ArgumentParser, transform: bool = True) -> None:
    g = p.add_argument_group("pairwise matrix")
    choice = g.add_mutually_exclusive_group()
    choice.add_argument("--metric", choices=["euclidean", "l1"], help="distance metric (default: euclidean)")
    choice.add_argument("--kernel", choices=["gaussian", "laplacian"], help="kernel instead of a metric")
    g.add_argument("--bandwidth", type=_bandwidth, default="median",
                   help="kernel bandwidth sigma, or 'median' for the median pairwise distance (default)")
    g.add_argument("--gaussian-convention", choices=["2sigma2", "sigma2"], default="2sigma2",
                   help="Gaussian exponent denominator: 2*sigma^2 (default) or sigma^2")
    if transform:
        g.add_argument("--transform", choices=["none", "bijective", "bijective-scaled", "fixed-point"],
                       default="none", help="transform applied to each matrix before the statistic")
    g.add_argument("--anchor", type=int, help="0-based observation index of the fixed point")


def _add_input_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--x", required=True, help="CSV of x observations (rows) or, with --matrix-in, an x matrix")
    p.add_argument("--y", required=True, help="CSV of y observations (rows) or, with --matrix-in, a y matrix")
    p.add_argument("--header", action="store_true", help="skip a header row in every input CSV")
    p.add_argument("--matrix-in", choices=["distance", "kernel"],
                   help="treat --x/--y as precomputed pairwise matrices of this kind")
    p.add_argument("--variant", choices=["biased", "normalized", "unbiased", "normalized-unbiased"],
                   default="biased", help="statistic variant (default: biased)")
    p.add_argument("--corrected", action="store_true",
                   help="apply the bijection with the exactness correction (needs an unbiased variant)")
    _add_matrix_options(p)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="metrickernel", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--output", "-o", help="write the JSON report here instead of standard output")
    common.add_argument("--threads", type=_positive, default=1,
                        help="worker threads; results do not depend on this (default: 1)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("stat", parents=[common], help="compute a dCov/HSIC statistic")
    _add_input_options(p)

    p = sub.add_parser("test", parents=[common], help="permutation test of independence")
    _add_input_options(p)
    p.add_argument("--permutations", "-R", type=_positive, default=DEFAULT_PERMUTATIONS,
                   help=f"number of permutations (default: {DEFAULT_PERMUTATIONS})")
    p.add_argument("--seed", type=int, default=0, help="64-bit seed of the permutation stream (default: 0)")
    p.add_argument("--timing", action="store_true", help="include elapsed_ms (makes output non-reproducible)")

    p = sub.add_parser("transform", parents=[common], help="transform a distance/kernel matrix CSV")
    p.add_argument("--matrix", required=True, help="input matrix CSV")
    p.add_argument("--kind", choices=["distance", "kernel"], required=True, help="kind of the input matrix")
    p.add_argument("--transform", choices=["bijective", "bijective-scaled", "fixed-point"], default="bijective",
                   help="transform to apply (default: bijective)")
    p.add_argument("--anchor", type=int, help="fixed point index (fixed-point transform of a distance)")
    p.add_argument("--out", required=True, help="output matrix CSV; provenance goes to <out>.json")
    p.add_argument("--header", action="store_true", help="skip a header row in the input CSV")

    p = sub.add_parser("diagnose", parents=[common], help="eigenvalue and structure checks")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--matrix", help="matrix CSV (needs --kind)")
    src.add_argument("--x", help="data CSV; the matrix is built with --metric/--kernel")
    p.add_argument("--kind", choices=["distance", "kernel"])
    p.add_argument("--tol", type=float, default=DEFAULT_TOL, help=f"relative tolerance (default: {DEFAULT_TOL})")
    p.add_argument("--header", action="store_true", help="skip a header row in the input CSV")
    _add_matrix_options(p, transform=False)

    p = sub.add_parser("simulate", parents=[common], help="generate a synthetic (x, y) sample as CSV")
    p.add_argument("--relation", choices=RELATIONS, required=True, help="dependence structure")
    p.add_argument("--n", type=_positive, required=True, help="sample size")
    p.add_argument("--noise", type=float, default=0.0, help="noise level (default: 0)")
    p.add_argument("--seed", type=int, default=0, help="random seed (default: 0)")
    p.add_argument("--out", help="CSV path (columns x, y); standard output when omitted")

    p = sub.add_parser("power", parents=[common], help="Monte-Carlo testing power")
    p.add_argument("--relation", choices=RELATIONS, required=True, help="dependence structure")
    p.add_argument("--n", type=_positive, default=100, help="sample size per trial (default: 100)")
    p.add_argument("--noise", type=float, default=1.0, help="noise level (default: 1)")
    p.add_argument("--method", choices=["euclidean", "l1", "gaussian", "laplacian"], default="gaussian",
                   help="pairwise matrix used by the test (default: gaussian)")
    p.add_argument("--transform", choices=["none", "bijective"], default="none",
                   help="map the matrix through the bijection first (default: none)")
    p.add_argument("--variant", choices=["biased", "normalized", "unbiased", "normalized-unbiased"],
                   default="biased", help="statistic variant (default: biased)")
    p.add_argument("--gaussian-convention", choices=["2sigma2", "sigma2"], default="2sigma2",
                   help="Gaussian exponent denominator (default: 2sigma2)")
    p.add_argument("--alpha", type=float, default=0.05, help="significance level (default: 0.05)")
    p.add_argument("--trials", type=_positive, default=1000, help="Monte-Carlo trials (default: 1000)")
    p.add_argument("--permutations", "-R", type=_positive, default=DEFAULT_PERMUTATIONS,
                   help=f"permutations per test (default: {DEFAULT_PERMUTATIONS})")
    p.add_argument("--seed", type=int, default=0, help="master seed (default: 0)")
    p.add_argument("--pvalues-out", help="CSV of per-trial p-values")

    p = sub.add_parser("cluster", parents=[common], help="spectral clustering on induced kernels")
    p.add_argument("--x", required=True, help="data CSV")
    p.add_argument("--header", action="store_true", help="skip a header row in the data CSV")
    p.add_argument("--k", type=_positive, required=True, help="number of clusters")
    p.add_argument("--transform", choices=["bijective", "fixed-point", "compare"], default="compare",
                   help="kernel to cluster on; 'compare' runs both (default)")
    p.add_argument("--anchor", type=int, help="fixed point index (default: leftmost observation)")
    p.add_argument("--seed", type=int, default=0, help="k-means seed (default: 0)")
    p.add_argument("--truth", help="CSV with one true label per row; adds adjusted Rand indices")
    p.add_argument("--labels-out", help="labels CSV (one column per clustering)")
    return parser


def _echo(args: argparse.Namespace) -> dict:
    # thread count never changes results, so it is left out
    return {k: v for k, v in sorted(vars(args).items()) if k not in ("output", "threads")}


def _pipeline(args) -> PipelineConfig:
    return PipelineConfig(
        metric=None if args.kernel else (args.metric or "euclidean"),
        kernel=args.kernel,
        bandwidth=args.bandwidth,
        convention=args.gaussian_convention,
        transform=args.transform,
        anchor=args.anchor,
        variant=_variant(args),
    )


def _variant(args) -> str:
    if not args.corrected:
        return args.variant
    return "normalized-corrected" if args.variant.startswith("normalized") else "corrected"


def _load_pair(args) -> tuple[PairwiseMatrix, PairwiseMatrix]:
    if args.matrix_in:
        kind = Kind(args.matrix_in)
        ms = []
        for path in (args.x, args.y):
            m = PairwiseMatrix(read_csv(path, args.header), kind, provenance=f"{kind.value} from {path}")
            ms.append(_apply_transform(m, args.transform, args.anchor))
        return ms[0], ms[1]
    config = _pipeline(args)
    x, y = read_csv(args.x, args.header), read_csv(args.y, args.header)
    if x.shape[0] != y.shape[0]:
        raise InvalidInputError(f"x and y have different sample sizes: {x.shape[0]} vs {y.shape[0]}")
    return build_matrix(x, config), build_matrix(y, config)


def _apply_transform(m: PairwiseMatrix, transform: str, anchor: int | None) -> PairwiseMatrix:
    if transform == "bijective":
        return bijective(m)[0]
    if transform == "bijective-scaled":
        return bijective_scaled(m)[0]
    if transform == "fixed-point":
        return fixed_point_to_kernel(m, anchor)[0] if m.kind is Kind.DISTANCE else fixed_point_to_metric(m)
    return m


def _validate(parser: argparse.ArgumentParser, args) -> None:
    if getattr(args, "corrected", False):
        if "unbiased" not in args.variant:
            parser.error("--corrected requires --variant unbiased or normalized-unbiased")
        if args.transform != "none":
            parser.error("--corrected applies the bijection itself; use --transform none")
    if args.command in ("stat", "test"):
        on_distances = not args.kernel and args.matrix_in != "kernel"
    elif args.command == "transform":
        on_distances = args.kind == "distance"
    else:
        on_distances = False
    if on_distances and getattr(args, "transform", None) == "fixed-point" and args.anchor is None:
        parser.error("--transform fixed-point on distances needs --anchor")
    if args.command == "diagnose" and args.matrix and not args.kind:
        parser.error("--matrix needs --kind")
    if args.command == "power" and not 0 < args.alpha < 1:
        parser.error("--alpha must lie in (0, 1)")


def _cmd_stat(args) -> dict:
    mx, my = _load_pair(args)
    s = compute_stat(mx, my, _variant(args))
    return {"value": s.value, "variant": s.variant.name, "family": s.variant.family, "n": s.n,
            "lineage": s.lineage}


def _cmd_test(args) -> dict:
    mx, my = _load_pair(args)
    res = permutation_test(mx, my, _variant(args), args.permutations, args.seed, args.threads)
    out = res.to_dict(timing=args.timing)
    out["n"] = res.observed.n
    return out


def _cmd_transform(args) -> dict:
    m = PairwiseMatrix(read_csv(args.matrix, args.header), Kind(args.kind), provenance=str(args.matrix))
    if args.transform == "bijective":
        out, spec = bijective(m)
        prov = spec.to_dict()
    elif args.transform == "bijective-scaled":
        out, spec = bijective_scaled(m)
        prov = spec.to_dict()
    elif m.kind is Kind.DISTANCE:
        out, spec = fixed_point_to_kernel(m, args.anchor)
        prov = spec.to_dict()
    else:
        out = fixed_point_to_metric(m)
        prov = {"kind": "fixed_point", "source_kind": "kernel", "max_used": None, "anchor": None}
    prov["output_kind"] = out.kind.value
    prov["warning"] = out.warning
    write_csv(args.out, out.values)
    Path(str(args.out) + ".json").write_text(dumps(prov) + "\n")
    return {"output": args.out, "provenance": prov, "n": out.n, "max_element": out.max_element}


def _cmd_diagnose(args) -> dict:
    if args.matrix:
        m = PairwiseMatrix(read_csv(args.matrix, args.header), Kind(args.kind), provenance=str(args.matrix))
    else:
        config = PipelineConfig(metric=None if args.kernel else (args.metric or "euclidean"), kernel=args.kernel,
                                bandwidth=args.bandwidth, convention=args.gaussian_convention)
        m = build_matrix(read_csv(args.x, args.header), config)
    reports = []
    induced, spec = bijective(m)
    if m.kind is Kind.DISTANCE:
        reports.append(check_negative_type(m, args.tol))
        reports.append(check_induced_kernel_biconditional(m, args.tol))
        reports.append(audit_rank_preservation(m, induced))
        anchor = 0 if args.anchor is None else args.anchor
        fixed, _ = fixed_point_to_kernel(m, anchor)
        fixed_rank = audit_rank_preservation(m, fixed).to_dict()
        fixed_rank["transform"] = f"fixed-point(z={anchor})"
    else:
        reports.append(check_positive_definite(m, args.tol))
        reports.append(check_negative_type(induced, args.tol))
        reports.append(audit_rank_preservation(m, induced))
        fixed_rank = None
    reports.append(audit_bijectivity(m, induced, spec, ulps=1))
    out = {"kind": m.kind.value, "n": m.n, "reports": [r.to_dict() for r in reports]}
    if fixed_rank is not None:
        out["fixed_point_rank"] = fixed_rank
    return out


def _cmd_simulate(args) -> dict | None:
    x, y = generate(SimulationSpec(args.relation, args.n, args.noise, args.seed))
    data = np.hstack([x, y])
    if args.out is None:
        for row in data:
            sys.stdout.write(",".join(repr(float(v)) for v in row) + "\n")
        return None
    write_csv(args.out, data)
    return {"output": args.out, "n": args.n, "relation": args.relation}


def _cmd_power(args) -> dict:
    method = MethodConfig(args.method, args.variant, args.transform, "median", args.gaussian_convention)
    rep = estimate_power(SimulationSpec(args.relation, args.n, args.noise, args.seed), method, args.alpha,
                         args.trials, args.permutations, args.seed, args.threads)
    if args.pvalues_out:
        write_csv(args.pvalues_out, np.array(rep.p_values)[:, None])
    return rep.to_dict()


def _cmd_cluster(args) -> dict:
    x = read_csv(args.x, args.header)
    truth = read_csv(args.truth).ravel().astype(int) if args.truth else None
    if args.transform == "compare":
        cmp = compare_transform_clustering(x, args.k, args.anchor, args.seed, truth)
        labels = np.column_stack([cmp.bijective.labels, cmp.fixed_point.labels])
        out = cmp.to_dict()
    else:
        d = distance_matrix(x)
        if args.transform == "bijective":
            kernel, _ = bijective_to_kernel(d)
            anchor = None
        else:
            anchor = leftmost_index(x) if args.anchor is None else args.anchor
            kernel, _ = fixed_point_to_kernel(d, anchor)
            kernel = PairwiseMatrix(np.maximum(kernel.values, 0.0), Kind.KERNEL, kernel.provenance)
        res = spectral_cluster(kernel, args.k, args.seed, zero_degree="isolate")
        labels = res.labels[:, None]
        out = res.to_dict()
        out["anchor"] = anchor
        if truth is not None:
            out["ari"] = float(adjusted_rand_score(truth, res.labels))
    if args.labels_out:
        with open(args.labels_out, "w") as fh:
            for row in labels:
                fh.write(",".join(str(int(v)) for v in row) + "\n")
    return out


_COMMANDS = {
    "stat": _cmd_stat,
    "test": _cmd_test,
    "transform": _cmd_transform,
    "diagnose": _cmd_diagnose,
    "simulate": _cmd_simulate,
    "power": _cmd_power,
    "cluster": _cmd_cluster,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _validate(parser, args)
    try:
        result = _COMMANDS[args.command](args)
    except _ERRORS as exc:
        print(f"metrickernel {args.command}: error: {exc}", file=sys.stderr)
        return 1
    if result is None:
        return 0
    result["config_echo"] = _echo(args)
    text = dumps(result) + "\n"
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
