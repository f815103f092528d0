"""Command-line front end.

Subcommands::

    solve    one equilibrium -> JSON on stdout
    sweep    a bias or bin-count grid -> CSV on stdout
    bounds   closed-form bin-count bounds -> JSON
    exp      exponential closed forms (lstar, two-bin, recursion, ...) -> JSON
    verify   brute-force oracle vs solver matrix -> JSON
    export   solve and write result.json + bins.csv to a directory

Exit codes: 0 success/converged, 2 no-equilibrium or collapsed, 1 usage
error. Output is deterministic: reals carry 17 significant digits, rows keep
grid order, and a fixed seed fixes every byte.

Custom densities (``--dist custom:FILE``) are JSON files with fields
``version`` (=1), ``name``, ``support`` ([lo, hi], finite) and ``density``,
which is either ``{"type": "table", "x": [...], "pdf": [...]}`` (interpolated
monotone-cubically and renormalised) or ``{"type": "piecewise_polynomial",
"breakpoints": [...], "coefficients": [[c0, c1, ...], ...]}`` with one
ascending-power coefficient row per interval, evaluated in ``x - left_break``.
See ``schemas/custom_density.schema.json``.

``QUANTEQ_THREADS`` sets the worker count for sweep rows; row order in the
output never depends on it.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Any, Callable, Iterable, Sequence

from . import __version__, bounds as bounds_mod, exponential as exp_mod
from ._serialize import csv_table, dumps
from .costs import decoder_cost, encoder_cost_by_integration
from .distributions import (CustomDensity, Exponential, Gaussian,
                            SourceDistribution, Uniform, custom_from_config)
from .equilibrium import (EquilibriumResult, EquilibriumStatus, GameConfig,
                          babbling_equilibrium, solve_lloyd_max,
                          solve_shooting)
from .errors import DomainError, NoEquilibrium, QuantEqError
from .oracle import comparison_matrix

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NO_EQUILIBRIUM = 2


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # exit 1 on usage errors
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _thread_count() -> int:
    try:
        return max(1, int(os.environ.get("QUANTEQ_THREADS", "1")))
    except ValueError:
        return 1


def _map_ordered(fn: Callable, items: Sequence) -> list:
    n = _thread_count()
    if n <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


def _add_dist_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--dist", required=True,
                   help="exponential | gaussian | uniform | custom:<file>")
    p.add_argument("--lambda", dest="rate", type=float, default=None,
                   help="exponential rate")
    p.add_argument("--mu", type=float, default=0.0, help="gaussian mean")
    p.add_argument("--sigma", type=float, default=1.0, help="gaussian stddev")
    p.add_argument("--lower", type=float, default=0.0, help="uniform lower")
    p.add_argument("--upper", type=float, default=1.0, help="uniform upper")


def _make_dist(args: argparse.Namespace) -> SourceDistribution:
    spec = args.dist
    if spec == "exponential":
        if args.rate is None:
            raise DomainError("--lambda is required for the exponential source")
        return Exponential(args.rate)
    if spec == "gaussian":
        return Gaussian(args.mu, args.sigma)
    if spec == "uniform":
        return Uniform(args.lower, args.upper)
    if spec.startswith("custom:"):
        path = Path(spec.split(":", 1)[1])
        with open(path) as fh:
            return custom_from_config(json.load(fh))
    raise DomainError(f"unknown distribution {spec!r}")


def _manifest(args: argparse.Namespace, subcommand: str,
              skip: tuple[str, ...] = ("emit_manifest",)) -> dict:
    params = {k: v for k, v in sorted(vars(args).items())
              if k not in ("command", "seed", *skip) and v is not None
              and not callable(v)}
    return {
        "subcommand": subcommand,
        "parameters": params,
        "seed": getattr(args, "seed", 0) or 0,
        "tool_version": __version__,
    }


def _emit_manifest(args: argparse.Namespace, subcommand: str) -> None:
    path = getattr(args, "emit_manifest", None)
    if path:
        Path(path).write_text(dumps(_manifest(args, subcommand)))


def _result_payload(d: SourceDistribution, bias: float,
                    result: EquilibriumResult,
                    encoder_integrated: float | None = None) -> dict:
    q = result.quantizer
    payload = {
        "dist": d.describe(),
        "bias": bias,
        "bins": q.bins,
        "edges": list(q.edges),
        "centroids": list(q.centroids),
        "decoder_cost": result.decoder_cost,
        "encoder_cost": result.encoder_cost,
        "iterations": result.iterations,
        "residual": result.residual,
        "status": result.status.value,
    }
    if encoder_integrated is not None:
        payload["encoder_cost_integrated"] = encoder_integrated
    return payload


def _parse_bins(text: str) -> int | str:
    if text.strip().lower() in ("inf", "infinite", "infinity"):
        return "inf"
    try:
        n = int(text)
    except ValueError:
        raise DomainError(f"--bins must be a positive integer or 'inf', got {text!r}")
    if n < 1:
        raise DomainError("--bins must be >= 1")
    return n


def _solve_finite(d: SourceDistribution, args: argparse.Namespace,
                  bins: int) -> EquilibriumResult:
    cfg = GameConfig(bias=args.bias, bins=bins,
                     edge_tolerance=args.tol,
                     max_iterations=args.max_iter)
    if bins == 1:
        return babbling_equilibrium(d, args.bias)
    if args.method == "shooting":
        return solve_shooting(d, cfg)
    init = None
    if args.init:
        init = [float(tok) for tok in args.init.split(",") if tok.strip()]
    return solve_lloyd_max(d, cfg, init=init,
                           reduce_on_collapse=args.reduce_on_collapse)


def _tail_report(d: SourceDistribution, result: EquilibriumResult,
                 bias: float) -> dict:
    edges = result.quantizer.edges
    lengths = [b - a for a, b in zip(edges, edges[1:])]
    # the bias pushes the ladder of bins toward its own sign
    tail = lengths[-3:] if bias >= 0 else lengths[:3][::-1]
    asymptote = 2.0 * abs(bias)
    if asymptote > 0:
        within = all(abs(l - asymptote) <= 0.15 * asymptote for l in tail)
    else:
        within = False
    gaps = [abs(l - asymptote) for l in tail]
    monotone = all(g0 >= g1 - 1e-12 for g0, g1 in zip(gaps, gaps[1:]))
    return {
        "asymptote": asymptote,
        "outermost_bin_lengths": tail,
        "within_15_percent": within,
        "monotone_approach": monotone,
    }


def _cmd_solve_payload(args: argparse.Namespace) -> tuple[dict, int]:
    d = _make_dist(args)
    bins = _parse_bins(args.bins)
    if bins == "inf":
        if isinstance(d, Exponential):
            if args.bias <= 0:
                raise NoEquilibrium(
                    "infinite-bin exponential equilibria need bias > 0")
            lstar = exp_mod.infinite_bin_length(d.rate, args.bias)
            jd = exp_mod.infinite_cost(d.rate, args.bias)
            payload = {
                "dist": d.describe(),
                "bias": args.bias,
                "bins": "inf",
                "mode": "exact",
                "bin_length": lstar,
                "decoder_cost": jd,
                "encoder_cost": jd + args.bias**2,
            }
            return payload, EXIT_OK
        if isinstance(d, Uniform):
            raise NoEquilibrium(
                "a bounded source admits only finitely many bins")
        n = args.truncation_bins
        result = _solve_finite(d, args, n)
        code = (EXIT_OK if result.status is EquilibriumStatus.CONVERGED
                else EXIT_NO_EQUILIBRIUM)
        payload = _result_payload(d, args.bias, result)
        payload["bins"] = "inf"
        payload["mode"] = "truncated_approximation"
        payload["truncation_bins"] = n
        payload["tail_report"] = _tail_report(d, result, args.bias)
        return payload, code
    result = _solve_finite(d, args, bins)
    integrated = None
    if args.debug_encoder_cost and result.converged:
        integrated = encoder_cost_by_integration(
            d, result.quantizer, args.bias)
    code = (EXIT_OK if result.status is EquilibriumStatus.CONVERGED
            else EXIT_NO_EQUILIBRIUM)
    return _result_payload(d, args.bias, result, integrated), code


def cmd_solve(args: argparse.Namespace) -> int:
    _emit_manifest(args, "solve")
    try:
        payload, code = _cmd_solve_payload(args)
    except NoEquilibrium as exc:
        sys.stdout.write(dumps({"error": "no_equilibrium", "detail": str(exc)}))
        return EXIT_NO_EQUILIBRIUM
    sys.stdout.write(dumps(payload))
    return code


def _sweep_rows(args: argparse.Namespace) -> list[tuple]:
    d = _make_dist(args)

    def one(point: tuple[float, int]) -> tuple:
        bias, bins = point
        try:
            if bins == 1:
                res = babbling_equilibrium(d, bias)
            else:
                cfg = GameConfig(bias=bias, bins=bins, edge_tolerance=args.tol,
                                 max_iterations=args.max_iter)
                res = (solve_shooting(d, cfg) if args.method == "shooting"
                       else solve_lloyd_max(d, cfg))
        except QuantEqError as exc:
            return (bins, bias, None, None, None, None,
                    _status_name(exc))
        if res.status is not EquilibriumStatus.CONVERGED:
            return (bins, bias, None, None, res.iterations, res.residual,
                    res.status.value)
        return (bins, bias, res.decoder_cost, res.encoder_cost,
                res.iterations, res.residual, res.status.value)

    if args.over == "bins":
        lo, hi = int(args.start), int(args.stop)
        step = int(args.step or 1)
        points = [(args.bias, n) for n in range(lo, hi + 1, step)]
    else:
        step = args.step
        if not step or step <= 0:
            raise DomainError("--step must be positive for bias sweeps")
        count = int(round((args.stop - args.start) / step))
        points = [(args.start + i * step, int(args.bins))
                  for i in range(count + 1)
                  if args.start + i * step <= args.stop + 1e-12]
    return _map_ordered(one, points)


def _status_name(exc: QuantEqError) -> str:
    return {
        "NoEquilibrium": "no_equilibrium",
        "BinCollapse": "collapsed",
        "PropagationFailure": "propagation_failure",
        "ZeroMassInterval": "zero_mass",
        "DomainError": "domain_error",
    }.get(type(exc).__name__, "error")


def cmd_sweep(args: argparse.Namespace) -> int:
    _emit_manifest(args, "sweep")
    rows = _sweep_rows(args)
    header = ("bins", "bias", "decoder_cost", "encoder_cost", "iterations",
              "residual", "status")
    sys.stdout.write(csv_table(header, rows))
    return EXIT_OK if any(r[6] == "converged" for r in rows) else EXIT_NO_EQUILIBRIUM


def _bias_list(text: str) -> list[float]:
    return [float(tok) for tok in text.split(",") if tok.strip()]


def cmd_bounds(args: argparse.Namespace) -> int:
    _emit_manifest(args, "bounds")
    biases = _bias_list(args.bias)
    entries: list[dict[str, Any]] = []
    family = args.family
    for b in biases:
        if family == "uniform":
            entry: dict[str, Any] = {"bias": b,
                                     "nmax": bounds_mod.nmax_uniform(b)}
        elif family == "exponential":
            rate = args.rate if args.rate is not None else 1.0
            thresholds = bounds_mod.exponential_thresholds(rate)
            entry = {"bias": b, "thresholds": thresholds}
            if b < 0:
                entry["nmax"] = exp_mod.nmax_exponential(rate, b)
            else:
                entry["nmax"] = None
            if args.empirical:
                entry["empirical_nmax"] = bounds_mod.empirical_nmax(
                    Exponential(rate), b, cap=args.cap)
        elif family == "gaussian":
            entry = {"bias": b,
                     "halfline_bins": bounds_mod.gaussian_halfline_bound(
                         args.sigma, b),
                     "side": "upper" if b < 0 else "lower"}
        elif family == "general":
            t = bounds_mod.TailAssumptions(
                support_lower=args.a, tail_threshold=args.K,
                centroid_gap=args.eta,
                lower_threshold=args.S, lower_gap=args.nu)
            entry = {"bias": b,
                     "noninformative": bounds_mod.general_noninformative(t, b)}
            if b < 0:
                entry["nmax"] = bounds_mod.general_semi_unbounded_bound(t, b)
            else:
                entry["nmax"] = None
        else:
            raise DomainError(f"unknown family {family!r}")
        entries.append(entry)
    sys.stdout.write(dumps({"family": family, "entries": entries}))
    return EXIT_OK


def cmd_exp(args: argparse.Namespace) -> int:
    _emit_manifest(args, "exp")
    rate = args.rate if args.rate is not None else 1.0
    op = args.operation
    if op == "lstar":
        lstar = exp_mod.infinite_bin_length(rate, args.bias)
        c = 2.0 / rate + 2.0 * args.bias
        psi = (c - lstar) * math.exp(rate * lstar) - (c + lstar)
        payload: dict[str, Any] = {"lambda": rate, "bias": args.bias,
                                   "lstar": lstar, "psi_residual": psi}
    elif op == "cost-limit":
        payload = {"lambda": rate, "bias": args.bias,
                   "cost_limit": exp_mod.infinite_cost(rate, args.bias)}
    elif op == "two-bin":
        edge = exp_mod.two_bin_edge(rate, args.bias)
        payload = {"lambda": rate, "bias": args.bias, "edge": edge}
    elif op == "recursion":
        state = exp_mod.backward_recursion(rate, args.bias, args.bins)
        payload = {"lambda": rate, "bias": args.bias, "bins": args.bins,
                   "lengths": list(state.lengths),
                   "edges": list(state.edges)}
    elif op == "nmax":
        payload = {"lambda": rate, "bias": args.bias,
                   "nmax": exp_mod.nmax_exponential(rate, args.bias)}
    elif op == "thresholds":
        payload = {"lambda": rate,
                   **bounds_mod.exponential_thresholds(rate)}
    else:
        raise DomainError(f"unknown exp operation {op!r}")
    sys.stdout.write(dumps(payload))
    return EXIT_OK


def cmd_verify(args: argparse.Namespace) -> int:
    _emit_manifest(args, "verify")
    if args.grid != "default":
        raise DomainError(f"unknown verification grid {args.grid!r}")
    rows = comparison_matrix(tol=args.tol)
    payload = {
        "grid": args.grid,
        "seed": args.seed,
        "tolerance": args.tol,
        "rows": [
            {"family": r.family, "bias": r.bias, "bins": r.bins,
             "oracle": r.oracle_verdict, "solver": r.solver_verdict,
             "max_edge_diff": r.max_edge_diff, "agree": r.agree}
            for r in rows
        ],
        "all_pass": all(r.agree for r in rows),
    }
    sys.stdout.write(dumps(payload))
    return EXIT_OK if payload["all_pass"] else EXIT_NO_EQUILIBRIUM


def cmd_export(args: argparse.Namespace) -> int:
    _emit_manifest(args, "export")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    try:
        payload, code = _cmd_solve_payload(args)
    except NoEquilibrium as exc:
        sys.stdout.write(dumps({"error": "no_equilibrium", "detail": str(exc)}))
        return EXIT_NO_EQUILIBRIUM
    result_path = out / "result.json"
    result_path.write_text(dumps(payload))
    written = [str(result_path)]
    if "edges" in payload and payload.get("status") == "converged":
        from .equilibrium import quantizer_from_edges

        d = _make_dist(args)
        edges = payload["edges"]
        cents = payload["centroids"]
        q_bounds = [d.support.lower, *edges, d.support.upper]
        report = decoder_cost(d, quantizer_from_edges(d, edges), args.bias)
        rows = []
        for k, (u, bc) in enumerate(zip(cents, report.per_bin), start=1):
            rows.append((k, q_bounds[k - 1], q_bounds[k], u, bc.mass,
                         bc.conditional_variance))
        csv_path = out / "bins.csv"
        csv_path.write_text(csv_table(
            ("bin", "lower", "upper", "centroid", "mass",
             "conditional_variance"), rows))
        written.append(str(csv_path))
    sys.stdout.write(dumps({"written": written}))
    return code


def _build_parser() -> _Parser:
    parser = _Parser(prog="quanteq",
                     description="Equilibria of the quadratic cheap-talk "
                                 "quantizer game")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_solver_flags(p: argparse.ArgumentParser) -> None:
        p.add_argument("--bias", type=float, required=True)
        p.add_argument("--method", choices=("lloyd", "shooting"),
                       default="lloyd")
        p.add_argument("--init", default=None,
                       help="comma-separated starting edges (lloyd only)")
        p.add_argument("--tol", type=float, default=1e-11)
        p.add_argument("--max-iter", type=int, default=200_000)
        p.add_argument("--reduce-on-collapse", action="store_true")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--emit-manifest", default=None, metavar="PATH")

    p_solve = sub.add_parser("solve", help="compute one equilibrium")
    _add_dist_args(p_solve)
    add_solver_flags(p_solve)
    p_solve.add_argument("--bins", required=True,
                         help="bin count, or 'inf'")
    p_solve.add_argument("--truncation-bins", type=int, default=20,
                         help="N for the truncated infinite-bin approximation")
    p_solve.add_argument("--debug-encoder-cost", action="store_true",
                         help="recompute the encoder cost by quadrature")
    p_solve.set_defaults(fn=cmd_solve)

    p_sweep = sub.add_parser("sweep", help="tabulate a parameter grid as CSV")
    _add_dist_args(p_sweep)
    p_sweep.add_argument("--over", choices=("bias", "bins"), required=True)
    p_sweep.add_argument("--from", dest="start", type=float, required=True)
    p_sweep.add_argument("--to", dest="stop", type=float, required=True)
    p_sweep.add_argument("--step", type=float, default=None)
    p_sweep.add_argument("--bias", type=float, default=0.0,
                         help="fixed bias for bin sweeps")
    p_sweep.add_argument("--bins", type=int, default=2,
                         help="fixed bin count for bias sweeps")
    p_sweep.add_argument("--method", choices=("lloyd", "shooting"),
                         default="shooting")
    p_sweep.add_argument("--tol", type=float, default=1e-11)
    p_sweep.add_argument("--max-iter", type=int, default=200_000)
    p_sweep.add_argument("--seed", type=int, default=0)
    p_sweep.add_argument("--emit-manifest", default=None, metavar="PATH")
    p_sweep.set_defaults(fn=cmd_sweep)

    p_bounds = sub.add_parser("bounds", help="closed-form bin-count bounds")
    p_bounds.add_argument("family",
                          choices=("uniform", "exponential", "gaussian",
                                   "general"))
    p_bounds.add_argument("--bias", required=True,
                          help="bias value or comma-separated list")
    p_bounds.add_argument("--lambda", dest="rate", type=float, default=None)
    p_bounds.add_argument("--sigma", type=float, default=1.0)
    p_bounds.add_argument("--a", type=float, default=0.0,
                          help="support lower bound (general)")
    p_bounds.add_argument("--K", type=float, default=0.0,
                          help="tail threshold (general)")
    p_bounds.add_argument("--eta", type=float, default=0.0,
                          help="tail centroid gap (general)")
    p_bounds.add_argument("--S", type=float, default=None,
                          help="lower-tail threshold (general, two-sided)")
    p_bounds.add_argument("--nu", type=float, default=None,
                          help="lower-tail centroid gap (general, two-sided)")
    p_bounds.add_argument("--empirical", action="store_true",
                          help="also scan the solver for the sharp bound")
    p_bounds.add_argument("--cap", type=int, default=32)
    p_bounds.add_argument("--seed", type=int, default=0)
    p_bounds.add_argument("--emit-manifest", default=None, metavar="PATH")
    p_bounds.set_defaults(fn=cmd_bounds)

    p_exp = sub.add_parser("exp", help="exponential-source closed forms")
    p_exp.add_argument("operation",
                       choices=("lstar", "cost-limit", "two-bin", "recursion",
                                "nmax", "thresholds"))
    p_exp.add_argument("--lambda", dest="rate", type=float, default=1.0)
    p_exp.add_argument("--bias", type=float, default=0.0)
    p_exp.add_argument("--bins", type=int, default=2)
    p_exp.add_argument("--seed", type=int, default=0)
    p_exp.add_argument("--emit-manifest", default=None, metavar="PATH")
    p_exp.set_defaults(fn=cmd_exp)

    p_verify = sub.add_parser("verify",
                              help="oracle/solver agreement matrix")
    p_verify.add_argument("--grid", default="default")
    p_verify.add_argument("--seed", type=int, default=0)
    p_verify.add_argument("--tol", type=float, default=1e-7)
    p_verify.add_argument("--emit-manifest", default=None, metavar="PATH")
    p_verify.set_defaults(fn=cmd_verify)

    p_export = sub.add_parser("export",
                              help="solve and write JSON/CSV artifacts")
    _add_dist_args(p_export)
    add_solver_flags(p_export)
    p_export.add_argument("--bins", required=True)
    p_export.add_argument("--truncation-bins", type=int, default=20)
    p_export.add_argument("--debug-encoder-cost", action="store_true")
    p_export.add_argument("--out", required=True, help="output directory")
    p_export.set_defaults(fn=cmd_export)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except QuantEqError as exc:
        if isinstance(exc, DomainError):
            sys.stderr.write(f"quanteq: error: {exc}\n")
            return EXIT_USAGE
        sys.stdout.write(dumps({"error": _status_name(exc),
                                "detail": str(exc)}))
        return EXIT_NO_EQUILIBRIUM
    except OSError as exc:
        sys.stderr.write(f"quanteq: error: {exc}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
