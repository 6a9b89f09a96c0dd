"""Command-line entry point: ``dpcp <command> [flags]``.

Exit status is 0 on success, 1 on a usage or input error and 2 when a
solver or other numerical routine fails. ``--config FILE`` supplies flag
values as ``key = value`` lines; flags given on the command line win.
"""

from __future__ import annotations

import argparse
import logging
import math
import sys

import numpy as np

from dpcp import bench, formats, lp, theory
from dpcp.arrangement import (
    Arrangement,
    SynthConfig,
    make_rng,
    random_arrangement,
    sample_arrangement,
    synthesize,
)
from dpcp.clustering import ESTIMATORS, ClusteringError, NormalEstimator, ihl_restarts, shl
from dpcp.numerics import NotPositiveDefiniteError
from dpcp.solvers import SolverConfig, solve

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2
NUMERIC_ERRORS = (lp.LPError, ClusteringError, ArithmeticError, np.linalg.LinAlgError, NotPositiveDefiniteError)
METHOD_CHOICES = [m.replace("_", "-") for m in ESTIMATORS] + [m for m in ESTIMATORS if "_" in m]
THEORY_CASES = ("equiangular", "two-planes", "orthogonal", "dominance", "continuous", "discrete", "lp")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# ---------------------------------------------------------------- argument types


def _int_list(text):
    try:
        return tuple(int(t) for t in str(text).split(",") if t.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _float_list(text):
    try:
        return tuple(float(t) for t in str(text).split(",") if t.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _str_list(text):
    return tuple(t.strip() for t in str(text).split(",") if t.strip())


def _on_off(text):
    t = str(text).strip().lower()
    if t in ("on", "1", "true", "yes"):
        return True
    if t in ("off", "0", "false", "no"):
        return False
    raise argparse.ArgumentTypeError(f"expected on/off, got {text!r}")


# ---------------------------------------------------------------- parser


def _solver_flags(p):
    g = p.add_argument_group("solver")
    g.add_argument("--epsilon", type=float, default=1e-3, help="relative-decrease stopping threshold")
    g.add_argument("--max-iter", type=int, default=None, help="iteration cap (default depends on method)")
    g.add_argument("--delta", type=float, default=1e-8, help="IRLS floor / ridge term")
    g.add_argument("--tau", type=float, default=1e-2, help="denoising weight")
    g.add_argument("--inner-max-iter", type=int, default=50)
    g.add_argument("--inner-tol", type=float, default=1e-6)


def _estimator_flags(p, default_method="dpcp-r"):
    p.add_argument("--method", default=default_method, choices=METHOD_CHOICES)
    p.add_argument("--ransac-trials", type=int, default=1000)
    p.add_argument("--ransac-thresh", type=float, default=0.03)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="dpcp", allow_abbrev=False,
                     description="Hyperplane clustering with dual principal component pursuit.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    def command(name, help_):
        p = sub.add_parser(name, help=help_, allow_abbrev=False)
        p.add_argument("--config", help="flat key = value file with flag defaults")
        p.add_argument("--out", default="-", help="output path (default stdout)")
        return p

    p = command("generate", "sample a synthetic hyperplane arrangement")
    p.add_argument("--D", type=int, required=True, help="ambient dimension")
    p.add_argument("--n", type=int, required=True, help="number of hyperplanes")
    p.add_argument("--alpha", type=float, default=1.0, help="cluster-size decay in (0, 1]")
    p.add_argument("--total", type=int, default=None, help="inlier count (default 300 n)")
    p.add_argument("--sigma", type=float, default=0.01, help="noise level along the normal")
    p.add_argument("--outliers", type=float, default=0.1, help="outlier share of the whole dataset")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--arrangement-out", default=None, help="also write the true normals here")

    p = command("solve", "estimate a single dominant hyperplane normal")
    p.add_argument("--in", dest="input", required=True, help="point-cloud CSV")
    p.add_argument("--method", default="dpcp-r", choices=[m.replace("_", "-") for m in ESTIMATORS[:4]]
                   + list(ESTIMATORS[:4]))
    _solver_flags(p)

    p = command("cluster", "cluster a point cloud into n hyperplanes")
    p.add_argument("--in", dest="input", required=True, help="point-cloud CSV")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--pipeline", default="shl", choices=bench.PIPELINES)
    _estimator_flags(p)
    p.add_argument("--restarts", type=int, default=10, help="IHL restarts")
    p.add_argument("--ihl-eps", type=float, default=1e-3)
    p.add_argument("--max-sweeps", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    _solver_flags(p)

    p = command("verify-theory", "numerically check optimality conditions")
    p.add_argument("--case", default="equiangular", choices=THEORY_CASES + ("all",))
    p.add_argument("--a", type=_float_list, default=None, help="equiangular parameter(s), comma-separated")
    p.add_argument("--weights", type=_int_list, default=None, help="hyperplane weights N1,N2,...")
    p.add_argument("--D", type=int, default=3)
    p.add_argument("--trials", type=int, default=50)
    p.add_argument("--resolution", type=int, default=None, help="lattice size (default: 200000 sphere, 20000 circle)")
    p.add_argument("--probes", type=int, default=2000, help="probe count for the uniformity error")
    p.add_argument("--theta0", type=float, default=5.0, help="angle (deg) of the LP start from b1")
    p.add_argument("--seed", type=int, default=0)

    p = command("bench", "run a synthetic clustering grid")
    p.add_argument("--D", dest="D_values", type=_int_list, default=(4, 9, 30))
    p.add_argument("--n", dest="n_values", type=_int_list, default=(2, 3, 4))
    p.add_argument("--alpha", dest="alpha_values", type=_float_list, default=(1.0, 0.8, 0.6))
    p.add_argument("--outliers", dest="outlier_ratios", type=_float_list, default=(0.1, 0.3, 0.5))
    p.add_argument("--methods", type=_str_list, default=("dpcp_r", "dpcp_irls", "ransac"))
    p.add_argument("--pipeline", default="shl", choices=bench.PIPELINES)
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--sigma", type=float, default=0.01)
    p.add_argument("--points-per-plane", type=int, default=300)
    p.add_argument("--ransac-trials", type=int, default=1000)
    p.add_argument("--ransac-thresh", type=float, default=0.03)
    p.add_argument("--restarts", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--timing", type=_on_off, default=True, help="on/off; off writes nan runtimes")
    p.add_argument("--long-out", default=None, help="per-trial long-format CSV for plotting")
    _solver_flags(p)

    p = command("accuracy", "score predicted labels against ground truth")
    p.add_argument("--pred", required=True, help="file with a labels line (cluster output)")
    p.add_argument("--true", required=True, help="point-cloud CSV with ground-truth labels")
    p.add_argument("--n", type=int, required=True)
    return parser


# ---------------------------------------------------------------- config file


def read_config(path) -> dict:
    out = {}
    try:
        with open(path) as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc.strerror}") from None
    for k, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{k}: expected key = value")
        key, value = (t.strip() for t in line.split("=", 1))
        out[key.lstrip("-").replace("-", "_")] = value
    return out


def _subparser(parser, name):
    for action in parser._actions:
        if isinstance(action, argparse._SubParsersAction):
            return action.choices.get(name)
    return None


def _apply_config(parser, argv):
    """Turn config entries into defaults of the chosen subcommand."""
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return
    name = next((a for a in argv if not a.startswith("-")), None)
    sp = _subparser(parser, name)
    if sp is None:
        return
    by_dest = {}
    for a in sp._actions:
        by_dest[a.dest] = a
        for opt in a.option_strings:
            by_dest[opt.lstrip("-").replace("-", "_")] = a
    defaults = {}
    for key, value in read_config(known.config).items():
        if key not in by_dest or key in ("config", "help"):
            raise UsageError(f"unknown config key {key!r}")
        a = by_dest[key]
        a.required = False  # the file supplies it
        defaults[a.dest] = value  # argparse converts string defaults with the flag's type
        if a.choices is not None and value not in a.choices:
            raise UsageError(f"config {key}: invalid choice {value!r}")
    sp.set_defaults(**defaults)


# ---------------------------------------------------------------- commands


def _solver_config(args) -> SolverConfig:
    return SolverConfig(args.epsilon, args.max_iter, args.delta, args.tau, args.inner_max_iter, args.inner_tol)


def _read_cloud(path):
    try:
        return formats.read_point_cloud(path, normalized=False)
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    except (formats.FormatError, IndexError) as exc:
        raise UsageError(f"{path}: {exc}") from None


def cmd_generate(args):
    cfg = SynthConfig(args.D, args.n, args.total, args.alpha, args.sigma, args.outliers, args.seed)
    rng = make_rng(args.seed)
    arr = random_arrangement(args.D, args.n, rng)
    pc = synthesize(arr, cfg, rng)
    with formats.open_out(args.out) as fh:
        formats.write_point_cloud(pc, fh)
    if args.arrangement_out:
        counts = tuple(int((pc.labels == i + 1).sum()) for i in range(args.n))
        with formats.open_out(args.arrangement_out) as fh:
            formats.write_arrangement(Arrangement(arr.normals, counts), fh)


def cmd_solve(args):
    cfg = _solver_config(args)
    pc = _read_cloud(args.input)
    rep = solve(args.method, pc.points, cfg)
    with formats.open_out(args.out) as fh:
        formats.write_solver_report(rep, fh)


def cmd_cluster(args):
    cfg = _solver_config(args)
    est = NormalEstimator(args.method, cfg, args.ransac_trials, args.ransac_thresh)
    if args.n < 1 or args.restarts < 1 or args.max_sweeps < 1:
        raise ValueError("--n, --restarts and --max-sweeps must be positive")
    pc = _read_cloud(args.input)
    if args.pipeline == "shl":
        res = shl(pc.points, args.n, est, make_rng(args.seed))
    else:
        res = ihl_restarts(pc.points, args.n, est, args.restarts, args.ihl_eps, args.max_sweeps, seed=args.seed)
    with formats.open_out(args.out) as fh:
        formats.write_cluster_result(res, fh)


def _kv(d) -> str:
    parts = []
    for k, v in d.items():
        if isinstance(v, (bool, np.bool_)):
            v = int(v)
        elif isinstance(v, (tuple, list)):
            v = "/".join(str(x) for x in v)
        elif isinstance(v, (float, np.floating)):
            v = formats.short(v)
        parts.append(f"{k}={v}")
    return ";".join(parts)


def _theory_checks(args):
    if (args.resolution is not None and args.resolution < 1) or args.trials < 1 or args.probes < 1:
        raise ValueError("--resolution, --trials and --probes must be positive")
    sphere_res = args.resolution or theory.GRID_RESOLUTION
    circle_res = args.resolution or theory.CIRCLE_RESOLUTION
    cases = THEORY_CASES if args.case == "all" else (args.case,)
    for case in cases:
        if case == "equiangular":
            for a in args.a or (0.2, 1.0 / 3.0, 0.6):
                yield theory.check_equiangular(a, sphere_res)
        elif case == "two-planes":
            yield theory.check_two_planes(args.trials, 500, 300, args.D, args.seed, circle_res)
            yield theory.check_two_planes(args.trials, 400, 400, args.D, args.seed, circle_res)
        elif case == "orthogonal":
            for w in ([args.weights] if args.weights else [(5, 3, 2), (5, 5, 2)]):
                yield theory.check_orthogonal(w, sphere_res)
        elif case == "dominance":
            for n in range(2, 6):
                yield theory.check_dominance(n, 100, 3)
        else:
            w = args.weights or ((5, 3, 2) if case == "continuous" else (300, 100, 50))
            D = 3 if case == "continuous" else args.D
            rng = make_rng(args.seed)
            arr = random_arrangement(D, len(w), rng, w)
            if case == "continuous":
                yield theory.check_continuous(arr, sphere_res)
                continue
            pc = sample_arrangement(arr, rng)
            clusters = [pc.points[:, pc.labels == i + 1] for i in range(arr.n)]
            if case == "discrete":
                yield theory.check_discrete(arr, clusters, args.probes, rng)
            else:
                # start point at theta0 from b1, tilted inside span(b1, b2)
                b1, b2 = arr.normals[:, 0], arr.normals[:, 1]
                t = b2 - (b1 @ b2) * b1
                t /= np.linalg.norm(t)
                th = math.radians(args.theta0)
                yield theory.check_lp(arr, clusters, math.cos(th) * b1 + math.sin(th) * t, args.probes, rng)


def cmd_verify_theory(args):
    rows = list(_theory_checks(args))
    with formats.open_out(args.out) as fh:
        fh.write("theorem,case,parameters,quantities,verdict,angle_gap_deg\n")
        for r in rows:
            verdict = "pass" if r.verdict else "fail"
            fh.write(f"{r.theorem},{r.case},{_kv(r.parameters)},{_kv(r.quantities)},{verdict},"
                     f"{formats.short(r.angle_gap_deg)}\n")


def cmd_bench(args):
    if args.jobs < 1:
        raise ValueError("--jobs must be at least 1")
    g = bench.GridConfig(args.D_values, args.n_values, args.alpha_values, args.outlier_ratios, args.trials,
                         args.methods, args.pipeline, args.seed, args.sigma, args.points_per_plane,
                         _solver_config(args), args.ransac_trials, args.ransac_thresh, args.restarts, args.timing)
    res = bench.run_grid(g, args.jobs)
    with formats.open_out(args.out) as fh:
        bench.write_grid_csv(res, fh)
    if args.long_out:
        with formats.open_out(args.long_out) as fh:
            bench.write_long_csv(res, fh, args.timing)
    if res.failures:
        print(f"warning: {len(res.failures)} trial(s) failed and were scored 0", file=sys.stderr)


def cmd_accuracy(args):
    try:
        pred = formats.read_labels(args.pred)
        true = formats.read_labels(args.true)
    except OSError as exc:
        raise UsageError(f"cannot read labels: {exc.strerror}") from None
    except formats.FormatError as exc:
        raise UsageError(str(exc)) from None
    if args.n < 1:
        raise ValueError("--n must be positive")
    with formats.open_out(args.out) as fh:
        fh.write(formats.short(bench.accuracy(pred, true, args.n)) + "\n")


COMMANDS = {
    "generate": cmd_generate,
    "solve": cmd_solve,
    "cluster": cmd_cluster,
    "verify-theory": cmd_verify_theory,
    "bench": cmd_bench,
    "accuracy": cmd_accuracy,
}


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        _apply_config(parser, argv)
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"dpcp: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"dpcp: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NUMERIC_ERRORS as exc:
        print(f"dpcp: numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"dpcp: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
