"""Primal-dual hybrid gradient baselines.

run_pdhg is the standard method with primal extrapolation; run_rapdhg keeps a
running average over each epoch and restarts from the average once its gap at
the reference smoothing pair has dropped by restart_factor relative to the
epoch start. Both log the same ConvergenceRecord rows as the gap-minimization
runners so the bench output is directly comparable; the gap_beta0 and
gap_betak columns coincide (there is no smoothing schedule here).
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Optional

from . import smoothed_gap as sg
from .algorithms import (ConvergenceRecord, IterationObserver, SolveResult,
                         _check_stride, _emit, _report_gap, start_point)
from .core import PrimalDualPoint, SaddleProblem, SmoothingPair
from .errors import ParameterError

# Reference smoothing level for monitored gaps, as a fraction of op_norm.
DEFAULT_GAP_BETA_SCALE = 0.05

# Slack on the tau * sigma * op_norm^2 <= 1 admissibility check; op_norm is a
# power-iteration estimate, so demand the bound only up to its tolerance.
_STEP_PRODUCT_SLACK = 1e-9


def default_gap_beta(op_norm: float) -> SmoothingPair:
    """The smoothing pair baselines (and the bench report column) monitor."""
    if op_norm <= 0.0:
        raise ParameterError("coupling operator norm must be positive")
    level = DEFAULT_GAP_BETA_SCALE * op_norm
    return SmoothingPair(level, level)


@dataclass(frozen=True)
class PdhgParams:
    """Step sizes and budget; tau and sigma default to 1 / op_norm."""

    tau: Optional[float] = None
    sigma: Optional[float] = None
    max_iters: int = 10_000
    tol: float = 0.0

    def __post_init__(self):
        for name in ("tau", "sigma"):
            v = getattr(self, name)
            if v is not None and not v > 0.0:
                raise ParameterError(f"{name} must be positive, got {v!r}")
        if self.max_iters < 0:
            raise ParameterError(f"max_iters must be nonnegative, got {self.max_iters!r}")
        if not self.tol >= 0.0:
            raise ParameterError(f"tol must be nonnegative, got {self.tol!r}")

    def resolve_steps(self, op_norm: float) -> tuple[float, float]:
        if op_norm <= 0.0:
            raise ParameterError("coupling operator norm must be positive")
        tau = self.tau if self.tau is not None else 1.0 / op_norm
        sigma = self.sigma if self.sigma is not None else 1.0 / op_norm
        product = tau * sigma * op_norm * op_norm
        if product > 1.0 + _STEP_PRODUCT_SLACK:
            raise ParameterError(
                f"tau * sigma * op_norm^2 = {product:.6g} exceeds 1")
        return tau, sigma


@dataclass(frozen=True)
class RapdhgParams:
    """Averaging/restart wrapper around PdhgParams.

    restart_factor in (0, 1]: the epoch restarts from the running average at
    the first recorded iterate where the average's gap is at most
    restart_factor times the epoch-start gap. 1.0 restarts on any
    non-increase (epochs of at least one step).
    """

    pdhg: PdhgParams = field(default_factory=PdhgParams)
    restart_factor: float = 0.5

    def __post_init__(self):
        if not 0.0 < self.restart_factor <= 1.0:
            raise ParameterError(
                f"restart_factor must lie in (0, 1], got {self.restart_factor!r}")


def run_pdhg(problem: SaddleProblem, z0: Optional[PrimalDualPoint] = None,
             params: Optional[PdhgParams] = None,
             observer: Optional[IterationObserver] = None, *,
             stride: int = 1, beta0: Optional[SmoothingPair] = None,
             report_beta: Optional[SmoothingPair] = None) -> SolveResult:
    """Primal step, then dual step against the extrapolated primal."""
    params = params if params is not None else PdhgParams()
    _check_stride(stride)
    op_norm = problem.op_norm
    tau, sigma = params.resolve_steps(op_norm)
    beta0 = beta0 if beta0 is not None else default_gap_beta(op_norm)
    z = prev = start_point(problem, z0)
    records: list[ConvergenceRecord] = []
    t0 = time.perf_counter()
    converged = False
    k = 0
    while True:
        final = k >= params.max_iters
        due = final or k % stride == 0
        stop = False
        if due:
            cxy = (problem.coupling.apply(z.x), problem.coupling.apply_adjoint(z.y))
            g0 = sg.gap_value(problem, beta0, z, cxy)
            rec = ConvergenceRecord(
                iter=k, elapsed_s=time.perf_counter() - t0, gap_beta0=g0,
                gap_betak=g0, step_norm=(z - prev).norm(), restarted=False,
                epoch=0, gap_report=_report_gap(problem, report_beta, z, cxy))
            stop = _emit(records, observer, rec)
            if g0 <= params.tol:
                converged = True
                stop = True
        if stop or final:
            break
        prev = z
        z = _pdhg_step(problem, z, tau, sigma)
        k += 1
    return SolveResult(point=z, records=records, converged=converged, iterations=k)


def run_rapdhg(problem: SaddleProblem, z0: Optional[PrimalDualPoint] = None,
               params: Optional[RapdhgParams] = None,
               observer: Optional[IterationObserver] = None, *,
               stride: int = 1, beta0: Optional[SmoothingPair] = None,
               report_beta: Optional[SmoothingPair] = None) -> SolveResult:
    """Restarted-averaged variant; monitors the running epoch average.

    Records (and the returned point, and the stopping rule) refer to the
    averaged candidate, which is the epoch-start point until a step has been
    taken. The underlying iterate only appears through step_norm.
    """
    params = params if params is not None else RapdhgParams()
    _check_stride(stride)
    op_norm = problem.op_norm
    tau, sigma = params.pdhg.resolve_steps(op_norm)
    beta0 = beta0 if beta0 is not None else default_gap_beta(op_norm)
    z = prev = start_point(problem, z0)
    zsum = PrimalDualPoint.zeros(problem.n, problem.m)
    count = 0
    gap_anchor = None
    candidate = z
    records: list[ConvergenceRecord] = []
    t0 = time.perf_counter()
    converged = False
    s = 0
    k = 0
    while True:
        final = k >= params.pdhg.max_iters
        due = final or k % stride == 0
        stop = False
        if due:
            candidate = (1.0 / count) * zsum if count else z
            cxy = (problem.coupling.apply(candidate.x),
                   problem.coupling.apply_adjoint(candidate.y))
            g_cand = sg.gap_value(problem, beta0, candidate, cxy)
            if gap_anchor is None:
                gap_anchor = g_cand
            restarted = False
            if g_cand > params.pdhg.tol and count >= 1 \
                    and g_cand <= params.restart_factor * gap_anchor:
                z = candidate
                gap_anchor = g_cand
                zsum = PrimalDualPoint.zeros(problem.n, problem.m)
                count = 0
                s += 1
                restarted = True
            rec = ConvergenceRecord(
                iter=k, elapsed_s=time.perf_counter() - t0, gap_beta0=g_cand,
                gap_betak=g_cand, step_norm=(z - prev).norm(), restarted=restarted,
                epoch=s, gap_report=_report_gap(problem, report_beta, candidate, cxy))
            stop = _emit(records, observer, rec)
            if g_cand <= params.pdhg.tol:
                converged = True
                stop = True
        if stop or final:
            break
        prev = z
        z = _pdhg_step(problem, z, tau, sigma)
        zsum = zsum + z
        count += 1
        k += 1
    return SolveResult(point=candidate, records=records, converged=converged,
                       iterations=k)


def _pdhg_step(problem, z, tau, sigma):
    aty = problem.coupling.apply_adjoint(z.y)
    x_new = problem.f.prox(tau, z.x - tau * aty)
    y_new = problem.gstar.prox(
        sigma, z.y + sigma * problem.coupling.apply(2.0 * x_new - z.x))
    return PrimalDualPoint(x_new, y_new)
