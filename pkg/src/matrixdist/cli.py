"""Command-line front end: one subcommand per library operation.

Exit codes: 0 success, 2 parameter/input error, 3 rejection under
``--assert-accept``. Every run with ``--out`` also writes a run manifest.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

from . import __version__, analysis, io, matdist, recovery
from .errors import MatrixDistError
from .grids import GRID_KINDS
from .spaces_kernels import KERNEL_IDS, make_kernel, purity_check

EXIT_OK, EXIT_PARAM, EXIT_REJECT = 0, 2, 3


class CliError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError(message)


def _floats(text: str) -> list[float]:
    return [float(t) for t in text.split(",") if t]


def _ints(text: str) -> list[int]:
    return [int(t) for t in text.split(",") if t]


def _add_kernel(p, required=True):
    p.add_argument("--kernel", choices=KERNEL_IDS, required=required)
    p.add_argument("--circumference", type=float, default=1.0)
    p.add_argument("--table", help="CSV table for custom-tabulated kernels")
    p.add_argument("--table-metric", action="store_true",
                   help="treat the custom table as a metric")


def _kernel(args):
    return make_kernel(args.kernel, circumference=args.circumference, table=args.table,
                       metric=args.table_metric)


def _add_test(p):
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--perms", type=int, default=999)
    p.add_argument("--assert-accept", action="store_true")


def _grid_params(args, kind):
    if kind == "stationary":
        return {"rho": args.rho}
    if kind == "locally-finite" and args.jitter is not None:
        return {"jitter": args.jitter}
    return {}


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="matrixdist", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", help="output file or directory")
    common.add_argument("--manifest", help="run manifest path (default: next to --out)")
    common.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("sample", parents=[common], help="sample a matrix or a distribution")
    _add_kernel(p)
    p.add_argument("--grid", choices=GRID_KINDS, default="bernoulli")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int)
    p.add_argument("--replicas", type=int, help="write a k x k distribution with k = n")
    p.add_argument("--rho", type=float, default=0.5)
    p.add_argument("--jitter", type=float)

    p = sub.add_parser("compare", parents=[common], help="two-sample test of distributions")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--q", type=int, required=True)
    _add_test(p)

    p = sub.add_parser("invariance", parents=[common], help="permutation invariance test")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--group", choices=("full", "diag"), default="full")
    p.add_argument("--q", type=int)
    _add_test(p)

    p = sub.add_parser("recover", parents=[common], help="invert an additive matrix")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--validate", action="store_true")
    p.add_argument("--alpha", type=float, default=0.01)

    p = sub.add_parser("folner", parents=[common], help="window averages of one matrix")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--statistic", required=True)
    p.add_argument("--windows", type=_ints, required=True)
    p.add_argument("--cap", type=float, default=1.0)

    p = sub.add_parser("entropy", parents=[common], help="mm-entropy profile")
    _add_kernel(p, required=False)
    p.add_argument("--source", choices=("kernel", "random-graph"), default="kernel")
    p.add_argument("--p", type=float, default=0.5)
    p.add_argument("--eps", type=_floats, required=True)
    p.add_argument("--n-list", type=_ints, required=True)

    p = sub.add_parser("spectrum", parents=[common], help="eigenvalues of a symmetric matrix")
    p.add_argument("--in", dest="inp", help="matrix CSV (otherwise sample --kernel on --n)")
    _add_kernel(p, required=False)
    p.add_argument("--n", type=int)
    p.add_argument("--normalization", choices=analysis.NORMALIZATIONS, default="by-n")
    p.add_argument("--semicircle", action="store_true")

    p = sub.add_parser("dispersion", parents=[common], help="spread of lambda_max / n")
    _add_kernel(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--replicas", type=int, default=20)

    p = sub.add_parser("grids-compare", parents=[common], help="compare two grid kinds")
    _add_kernel(p)
    p.add_argument("--kinds", required=True, help="two grid kinds, comma separated")
    p.add_argument("--k", type=int, default=8)
    p.add_argument("--replicas", type=int, default=400)
    p.add_argument("--q", type=int, default=4)
    p.add_argument("--rho", type=float, default=0.5)
    p.add_argument("--jitter", type=float)
    _add_test(p)

    p = sub.add_parser("aldous", parents=[common], help="sample Aldous arrays")
    p.add_argument("--f3", choices=sorted(matdist.ALDOUS_F3), required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int)
    p.add_argument("--symmetric", action="store_true")
    p.add_argument("--replicas", type=int)

    p = sub.add_parser("graph", parents=[common], help="random-graph distance matrix")
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--n", type=int, required=True)

    p = sub.add_parser("purity", parents=[common], help="empirical purity check")
    _add_kernel(p)
    p.add_argument("--n-probe", type=int, default=32)
    p.add_argument("--m-probe", type=int, default=512)
    p.add_argument("--threshold", type=float, default=0.01)
    return parser


def _need_out(args):
    if not args.out:
        raise CliError(f"{args.command} requires --out")
    return Path(args.out)


def _report(args, obj, stem_out=None):
    """Print a JSON report and, with --out, write it; returns written paths."""
    data = io.to_jsonable(obj)
    print(json.dumps(data, indent=2, sort_keys=True))
    if args.out:
        return [io.write_json(stem_out or args.out, data)]
    return []


def _write_matrix_or_dist(args, result):
    out = _need_out(args)
    if isinstance(result, matdist.EmpiricalMatrixDistribution):
        return io.write_distribution(out, result)
    return io.write_sample_matrix(out, result)


def cmd_sample(args):
    kernel = _kernel(args)
    params = _grid_params(args, args.grid)
    if args.replicas:
        result = matdist.sample_matrix_distribution(kernel, args.grid, args.n, args.replicas,
                                                    args.seed, args.threads, **params)
    else:
        from .grids import sample_grid
        grid = sample_grid(args.grid, kernel.space_x, kernel.space_y, args.n,
                           args.m or args.n, args.seed, **params)
        result = matdist.evaluate_matrix(kernel, grid)
    return _write_matrix_or_dist(args, result), None


def cmd_compare(args):
    rep = matdist.compare_distributions(io.read_distribution(args.a), io.read_distribution(args.b),
                                        args.q, args.alpha, args.perms, args.seed)
    rep.params.update({"a_path": args.a, "b_path": args.b})
    return _report(args, rep), rep.decision


def cmd_invariance(args):
    rep = matdist.invariance_check(io.read_distribution(args.inp), args.group, args.alpha,
                                   args.perms, args.seed, args.q)
    rep.params["path"] = args.inp
    return _report(args, rep), rep.decision


def cmd_recover(args):
    res = recovery.recover_additive(io.read_matrix_csv(args.inp))
    data = res.to_dict()
    if args.validate:
        data["validation"] = recovery.validate_recovery(
            res, make_kernel("add-mod1").space_x, args.alpha)
    return _report(args, data), None


def cmd_folner(args):
    trace = recovery.folner_average(io.read_matrix_csv(args.inp), args.statistic,
                                    args.windows, args.cap)
    paths = []
    if args.out:
        out = Path(args.out)
        paths.append(io.write_csv(out, zip(trace.window_sizes, trace.averages)))
        paths.append(io.write_json(out.with_suffix(".json"), trace))
    print(json.dumps(io.to_jsonable(trace), indent=2, sort_keys=True))
    return paths, None


def cmd_entropy(args):
    if args.source == "random-graph":
        source = "random-graph"
    else:
        if not args.kernel:
            raise CliError("entropy needs --kernel or --source random-graph")
        source = _kernel(args)
    prof = analysis.entropy_profile(source, args.eps, args.n_list, args.seed, p=args.p)
    paths = []
    if args.out:
        out = Path(args.out)
        paths.append(io.write_csv(out, [("epsilon", "n", "H"), *prof.rows()]))
        paths.append(io.write_json(out.with_suffix(".json"), prof))
    print(json.dumps(io.to_jsonable(prof), indent=2, sort_keys=True))
    return paths, None


def cmd_spectrum(args):
    if args.inp:
        mat = io.read_sample_matrix(args.inp)
    else:
        if not (args.kernel and args.n):
            raise CliError("spectrum needs --in, or --kernel with --n")
        from .grids import sample_symmetric_grid
        kernel = _kernel(args)
        mat = matdist.evaluate_matrix(kernel,
                                      sample_symmetric_grid(kernel.space_x, args.n, args.seed))
    spec = analysis.spectrum(mat, args.normalization)
    summary = {"n": spec.n, "normalization": spec.normalization,
               "top": spec.eigenvalues[:5].tolist()}
    if args.semicircle:
        summary["semicircle_distance"] = analysis.semicircle_distance(spec)
    paths = []
    if args.out:
        out = Path(args.out)
        paths.append(io.write_csv(out, enumerate(spec.eigenvalues.tolist())))
        paths.append(io.write_json(out.with_suffix(".json"), summary))
    print(json.dumps(summary, indent=2, sort_keys=True))
    return paths, None


def cmd_dispersion(args):
    rep = analysis.spectral_dispersion(_kernel(args), args.n, args.replicas, args.seed,
                                       threads=args.threads)
    return _report(args, rep), None


def cmd_grids_compare(args):
    kinds = tuple(k.strip() for k in args.kinds.split(","))
    if len(kinds) != 2 or any(k not in GRID_KINDS for k in kinds):
        raise CliError(f"--kinds needs two of {', '.join(GRID_KINDS)}")
    rep = matdist.compare_grid_types(_kernel(args), kinds, args.k, args.replicas, args.q,
                                     args.alpha, args.perms, args.seed, args.threads,
                                     tuple(_grid_params(args, k) for k in kinds))
    return _report(args, rep), rep.decision


def cmd_aldous(args):
    if args.replicas:
        if args.m not in (None, args.n):
            raise CliError("distributions are square; drop --m")
        result = matdist.aldous_distribution(args.f3, args.n, args.replicas, args.seed,
                                             args.symmetric, args.threads)
    else:
        result = matdist.aldous_sample(args.f3, args.n, args.m or args.n, args.seed,
                                       args.symmetric)
    return _write_matrix_or_dist(args, result), None


def cmd_graph(args):
    return _write_matrix_or_dist(args, matdist.random_graph_matrix(args.p, args.n, args.seed)), None


def cmd_purity(args):
    rep = purity_check(_kernel(args), args.n_probe, args.m_probe, args.threshold, args.seed)
    return _report(args, rep), None


COMMANDS = {
    "sample": cmd_sample,
    "compare": cmd_compare,
    "invariance": cmd_invariance,
    "recover": cmd_recover,
    "folner": cmd_folner,
    "entropy": cmd_entropy,
    "spectrum": cmd_spectrum,
    "dispersion": cmd_dispersion,
    "grids-compare": cmd_grids_compare,
    "aldous": cmd_aldous,
    "graph": cmd_graph,
    "purity": cmd_purity,
}


def _manifest_path(args) -> Path | None:
    if args.manifest:
        return Path(args.manifest)
    if not args.out:
        return None
    out = Path(args.out)
    if out.is_dir():
        return out / "run.json"
    return out.with_name(out.stem + ".run.json")


def run(argv=None) -> int:
    start = time.perf_counter()
    try:
        args = build_parser().parse_args(argv)
        if args.threads < 1:
            raise CliError("--threads must be at least 1")
        paths, decision = COMMANDS[args.command](args)
        target = _manifest_path(args)
        if target is not None:
            params = {k: v for k, v in vars(args).items() if k not in ("manifest",)}
            io.write_json(target, {
                "command": args.command,
                "params": params,
                "seed": args.seed,
                "artifacts": [str(p) for p in paths],
                "version": __version__,
                "duration_s": time.perf_counter() - start,
            })
    except (CliError, MatrixDistError, OSError) as exc:
        print(f"error: {exc}".replace("\n", " "), file=sys.stderr)
        return EXIT_PARAM
    if getattr(args, "assert_accept", False) and decision == "reject":
        print("error: test rejected under --assert-accept", file=sys.stderr)
        return EXIT_REJECT
    return EXIT_OK


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
