"""Command line interface: solve, bench, check, fetch-qssp30.

Exit codes are part of the external interface: 0 success, 1 usage or input
error, 2 iteration budget exhausted before the tolerance, 3 failed
self-check (including checksum mismatches on fetched files).
"""

from __future__ import annotations

import argparse
import gzip
import hashlib
import os
import sys
import urllib.request
from dataclasses import dataclass
from typing import Optional

from . import algorithms, baselines, checks, history, ingestion
from .core import SaddleProblem, SmoothingPair
from .errors import GapminError

ALGO_IDS = ("pg", "apg", "rapg", "pdhg", "rapdhg")

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_BUDGET = 2
EXIT_CHECK = 3

DEFAULT_QSSP30_URL = "https://cblib.zib.de/download/all/qssp30.cbf.gz"

_FIXTURES = os.path.join(os.path.dirname(os.path.abspath(__file__)), "fixtures")

# Problem names resolvable without a path.
BUILTIN_PROBLEMS = {"toy-lp": os.path.join(_FIXTURES, "toy_lp.txt")}


@dataclass(frozen=True)
class RunConfig:
    """One solve/bench invocation, after flag parsing."""

    problem: str
    algo: str = "rapg"
    max_iters: int = 10_000
    tol: float = 0.0
    stride: int = 1
    history: Optional[str] = None
    report_beta: Optional[float] = None
    report_tol: float = 1e-6
    seed: int = 0
    p_prime: Optional[float] = None
    b: Optional[float] = None
    t: Optional[float] = None
    beta0: Optional[float] = None
    beta_x0: Optional[float] = None
    beta_y0: Optional[float] = None
    restart_factor: Optional[float] = None
    tau: Optional[float] = None
    sigma: Optional[float] = None


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def load_problem(spec: str) -> tuple[ingestion.ConicProgram, ingestion.ParseDiagnostics]:
    """Load a builtin name, a native file, or a .cbf file."""
    path = BUILTIN_PROBLEMS.get(spec, spec)
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    if path.endswith(".cbf"):
        return ingestion.parse_cbf_subset(text)
    return ingestion.parse_native(text)


def _maybe(kwargs: dict, key: str, value):
    if value is not None:
        kwargs[key] = value


def build_params(config: RunConfig, algo: str):
    """Params object for one algorithm id, honoring flag overrides."""
    if algo == "pg":
        kw: dict = {"max_iters": config.max_iters, "tol": config.tol}
        _maybe(kw, "p_prime", config.p_prime)
        _maybe(kw, "b", config.b)
        _maybe(kw, "beta0", config.beta0)
        return algorithms.ProxGradParams(**kw)
    if algo in ("apg", "rapg"):
        kw = {"max_iters": config.max_iters, "tol": config.tol}
        _maybe(kw, "t", config.t)
        _maybe(kw, "b", config.b)
        _maybe(kw, "beta_x0", config.beta_x0)
        _maybe(kw, "beta_y0", config.beta_y0)
        inner = algorithms.AcceleratedParams(**kw)
        if algo == "apg":
            return inner
        rkw = {"inner": inner}
        _maybe(rkw, "restart_factor", config.restart_factor)
        return algorithms.RestartParams(**rkw)
    kw = {"max_iters": config.max_iters, "tol": config.tol}
    _maybe(kw, "tau", config.tau)
    _maybe(kw, "sigma", config.sigma)
    pdhg = baselines.PdhgParams(**kw)
    if algo == "pdhg":
        return pdhg
    rkw = {"pdhg": pdhg}
    _maybe(rkw, "restart_factor", config.restart_factor)
    return baselines.RapdhgParams(**rkw)


def run_algo(problem: SaddleProblem, algo: str, config: RunConfig,
             observer=None, report_beta: Optional[SmoothingPair] = None
             ) -> algorithms.SolveResult:
    params = build_params(config, algo)
    common = dict(observer=observer, stride=config.stride, report_beta=report_beta)
    if algo == "pg":
        return algorithms.run_prox_grad(problem, params=params, **common)
    if algo == "apg":
        return algorithms.run_accelerated(problem, params=params, **common)
    if algo == "rapg":
        return algorithms.run_restarted(problem, params=params, **common)
    if algo == "pdhg":
        return baselines.run_pdhg(problem, params=params, **common)
    if algo == "rapdhg":
        return baselines.run_rapdhg(problem, params=params, **common)
    raise _UsageError(f"unknown algorithm {algo!r}")


def _print_diags(diags: ingestion.ParseDiagnostics) -> None:
    for line in diags.formatted():
        print(f"warning: {line}", file=sys.stderr)


def _describe(program: ingestion.ConicProgram, problem: SaddleProblem) -> None:
    print(f"problem: n={program.n} m={program.m} nnz={program.a_vals.size} "
          f"sense={program.sense}")
    print(f"op_norm: {problem.op_norm!r}")


def cmd_solve(config: RunConfig) -> int:
    program, diags = load_problem(config.problem)
    _print_diags(diags)
    problem = ingestion.to_saddle(program)
    _describe(program, problem)
    writer = None
    try:
        if config.history is not None:
            writer = history.HistoryWriter(config.history, config.algo)
        result = run_algo(problem, config.algo, config, observer=writer)
    finally:
        if writer is not None:
            writer.close()
    last = result.records[-1]
    print(f"algo: {config.algo}")
    print(f"iterations: {result.iterations}")
    print(f"gap_beta0: {last.gap_beta0!r}")
    print(f"gap_betak: {last.gap_betak!r}")
    print(f"elapsed_s: {last.elapsed_s:.3f}")
    print(f"converged: {result.converged}")
    if config.history is not None:
        print(f"history: {config.history}")
    return EXIT_OK if result.converged or config.tol <= 0.0 else EXIT_BUDGET


def cmd_bench(config: RunConfig) -> int:
    program, diags = load_problem(config.problem)
    _print_diags(diags)
    problem = ingestion.to_saddle(program)
    _describe(program, problem)
    if config.report_beta is not None:
        report_beta = SmoothingPair(config.report_beta, config.report_beta)
    else:
        report_beta = baselines.default_gap_beta(problem.op_norm)
    print(f"report_beta: {report_beta.beta_x!r}")
    runs: dict[str, list] = {}
    results: dict[str, algorithms.SolveResult] = {}
    for algo in ALGO_IDS:
        writer = None
        try:
            if config.history is not None:
                writer = history.HistoryWriter(
                    os.path.join(config.history, f"{algo}.csv"), algo)
            result = run_algo(problem, algo, config, observer=writer,
                              report_beta=report_beta)
        finally:
            if writer is not None:
                writer.close()
        results[algo] = result
        runs[algo] = result.records
    if config.history is not None:
        history.write_merged(os.path.join(config.history, "merged.csv"), runs)
        history.write_report(os.path.join(config.history, "report.csv"), runs)
        print(f"history: {config.history}")

    print(f"{'algo':<8} {'iters_to_tol':>12} {'final_report':>13} "
          f"{'final_gap0':>13} {'iters':>8} {'elapsed_s':>10}")
    all_reached = True
    for algo in ALGO_IDS:
        records = runs[algo]
        reached = iterations_to_tol(records, config.report_tol)
        if reached is None:
            all_reached = False
        last = records[-1]
        print(f"{algo:<8} {'-' if reached is None else reached:>12} "
              f"{last.gap_report:>13.3e} {last.gap_beta0:>13.3e} "
              f"{last.iter:>8} {last.elapsed_s:>10.3f}")
    return EXIT_OK if all_reached else EXIT_BUDGET


def iterations_to_tol(records, tol: float) -> Optional[int]:
    """First recorded iteration whose reporting gap is at or below tol."""
    for rec in records:
        gap = rec.gap_report if rec.gap_report is not None else rec.gap_beta0
        if gap <= tol:
            return rec.iter
    return None


def cmd_check(config: RunConfig) -> int:
    program, diags = load_problem(config.problem)
    _print_diags(diags)
    problem = ingestion.to_saddle(program)
    _describe(program, problem)
    results = checks.run_problem_checks(problem, seed=config.seed)
    width = max(len(r.name) for r in results)
    failed = []
    for r in results:
        status = "ok" if r.passed else "FAIL"
        print(f"{r.name:<{width}}  margin={r.margin:+.3e}  {status}  ({r.detail})")
        if not r.passed:
            failed.append(r.name)
    if failed:
        print(f"failed checks: {', '.join(failed)}", file=sys.stderr)
        return EXIT_CHECK
    return EXIT_OK


def default_cache_dir() -> str:
    env = os.environ.get("GAPMIN_CACHE_DIR")
    if env:
        return env
    return os.path.join(os.path.expanduser("~"), ".cache", "gapmin")


def fetch_qssp30(dest_dir: str, url: str = DEFAULT_QSSP30_URL,
                 sha256: Optional[str] = None, timeout: float = 120.0
                 ) -> tuple[str, str]:
    """Download and decompress qssp30.cbf; returns (path, sha256 hex digest).

    An existing file is reused without re-downloading. The digest is of the
    decompressed file; when ``sha256`` is given a mismatch raises GapminError
    after leaving the file in place for inspection.
    """
    os.makedirs(dest_dir, exist_ok=True)
    target = os.path.join(dest_dir, "qssp30.cbf")
    if not os.path.exists(target):
        with urllib.request.urlopen(url, timeout=timeout) as response:
            payload = response.read()
        if url.endswith(".gz"):
            payload = gzip.decompress(payload)
        tmp = target + ".part"
        with open(tmp, "wb") as fh:
            fh.write(payload)
        os.replace(tmp, target)
    with open(target, "rb") as fh:
        digest = hashlib.sha256(fh.read()).hexdigest()
    if sha256 is not None and digest != sha256.lower():
        raise GapminError(
            f"sha256 mismatch for {target}: expected {sha256}, got {digest}")
    return target, digest


def cmd_fetch_qssp30(args) -> int:
    dest = args.dest if args.dest is not None else default_cache_dir()
    try:
        path, digest = fetch_qssp30(dest, url=args.url, sha256=args.sha256)
    except GapminError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CHECK
    except OSError as exc:
        print(f"error: download failed: {exc}", file=sys.stderr)
        return EXIT_USAGE
    print(f"file: {path}")
    print(f"sha256: {digest}")
    if args.sha256 is None:
        print("note: pass --sha256 with the digest above to pin future fetches")
    program, diags = load_problem(path)
    _print_diags(diags)
    print(f"parsed: n={program.n} m={program.m} nnz={program.a_vals.size}")
    return EXIT_OK


def _add_common(sub: argparse.ArgumentParser, with_algo: bool) -> None:
    sub.add_argument("--problem", default="toy-lp",
                     help="path to a native or .cbf file, or a builtin name "
                          "(default: toy-lp)")
    if with_algo:
        sub.add_argument("--algo", choices=ALGO_IDS, default="rapg")
    sub.add_argument("--max-iters", type=int, default=10_000)
    sub.add_argument("--tol", type=float, default=0.0,
                     help="stop when the gap at the initial smoothing pair "
                          "falls to this value (default 0: run the budget)")
    sub.add_argument("--stride", type=int, default=1,
                     help="record (and test stopping/restarts) every this "
                          "many iterations")
    sub.add_argument("--p-prime", type=float, default=None, dest="p_prime",
                     help="pg: schedule decay exponent offset")
    sub.add_argument("--b", type=float, default=None,
                     help="schedule shift (pg and apg/rapg)")
    sub.add_argument("--t", type=float, default=None,
                     help="apg/rapg: momentum parameter")
    sub.add_argument("--beta0", type=float, default=None,
                     help="pg: smoothing scale override")
    sub.add_argument("--beta-x0", type=float, default=None, dest="beta_x0",
                     help="apg/rapg: initial primal smoothing weight")
    sub.add_argument("--beta-y0", type=float, default=None, dest="beta_y0",
                     help="apg/rapg: initial dual smoothing weight")
    sub.add_argument("--restart-factor", type=float, default=None,
                     dest="restart_factor",
                     help="rapg/rapdhg: gap decrease triggering a restart")
    sub.add_argument("--tau", type=float, default=None,
                     help="pdhg/rapdhg: primal step")
    sub.add_argument("--sigma", type=float, default=None,
                     help="pdhg/rapdhg: dual step")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="gapmin",
                     description="Solve saddle-point problems by minimizing "
                                 "the smoothed duality gap.")
    subs = parser.add_subparsers(dest="command", required=True)

    solve = subs.add_parser("solve", help="run one algorithm", parents=[],
                            description="Run one algorithm on one problem.")
    _add_common(solve, with_algo=True)
    solve.add_argument("--history", default=None,
                       help="write the convergence CSV to this file")

    bench = subs.add_parser("bench", help="run all five algorithms",
                            description="Run all five algorithms from the "
                                        "same start and print an "
                                        "iterations-to-tolerance table.")
    _add_common(bench, with_algo=False)
    bench.add_argument("--history", default=None, metavar="DIR",
                       help="write per-algorithm, merged, and report CSVs "
                            "into this directory")
    bench.add_argument("--report-beta", type=float, default=None,
                       dest="report_beta",
                       help="smoothing level for the shared reporting gap "
                            "(default 0.05 * op_norm)")
    bench.add_argument("--report-tol", type=float, default=1e-6,
                       dest="report_tol",
                       help="tolerance for the iterations-to-tol table")

    check = subs.add_parser("check", help="run structural self-checks",
                            description="Run seeded structural checks on a "
                                        "problem and print margins.")
    check.add_argument("--problem", default="toy-lp")
    check.add_argument("--seed", type=int, default=0)

    fetch = subs.add_parser("fetch-qssp30",
                            help="download the large benchmark instance",
                            description="Download qssp30.cbf.gz, decompress, "
                                        "and report its sha256.")
    fetch.add_argument("--dest", default=None,
                       help="target directory (default: GAPMIN_CACHE_DIR or "
                            "~/.cache/gapmin)")
    fetch.add_argument("--url", default=DEFAULT_QSSP30_URL)
    fetch.add_argument("--sha256", default=None,
                       help="expected digest of the decompressed file")
    return parser


def _config_from(args: argparse.Namespace) -> RunConfig:
    fields = {f for f in RunConfig.__dataclass_fields__}
    values = {k: v for k, v in vars(args).items() if k in fields and v is not None}
    return RunConfig(**values)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "fetch-qssp30":
            return cmd_fetch_qssp30(args)
        config = _config_from(args)
        if args.command == "solve":
            return cmd_solve(config)
        if args.command == "bench":
            return cmd_bench(config)
        return cmd_check(config)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (GapminError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def console_main() -> None:
    sys.exit(main())


if __name__ == "__main__":
    console_main()
