"""Runners that minimize the smoothed duality gap directly.

Three methods share the same skeleton: evaluate the gap machinery at the
current point, take a proximal-gradient-type step on the smooth component,
and shrink the smoothing level on a fixed schedule.

* run_prox_grad: plain proximal gradient with continuation; beta shrinks like
  1/sqrt(k), steps stay at the inverse Lipschitz constant of the level.
* run_accelerated: momentum form with averaged iterates; beta shrinks like
  1/k under an admissibility condition on the initial smoothing pair.
* run_restarted: the accelerated method restarted from scratch every time the
  gap at the initial smoothing level halves (geometric decrease generally:
  `restart_factor`), which upgrades the rate to linear on problems with
  sharp gaps.

All runners log ConvergenceRecord rows (every `stride` iterations plus the
final iterate), accept an observer callback that can stop the run, and stop
when G_{beta_0} falls to `tol` or the iteration budget runs out.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable, Optional, Protocol

import numpy as np

from . import smoothed_gap as sg
from .core import PrimalDualPoint, SaddleProblem, SmoothingPair, StepPair
from .errors import ParameterError


@dataclass(frozen=True)
class ProxGradParams:
    """Schedule and budget for the basic continuation method.

    beta_k = scale / sqrt(k + b) where scale defaults to
    op_norm * sqrt(p_prime / (b + p_prime)); passing beta0 overrides the
    scale directly. Steps are gamma_k = beta_k / (op_norm^2 + 2 beta_k^2).
    """

    p_prime: float = 0.05
    b: float = 4.45
    beta0: Optional[float] = None
    max_iters: int = 10_000
    tol: float = 0.0

    def __post_init__(self):
        if not 0.0 < self.p_prime < 1.0:
            raise ParameterError(f"p_prime must lie in (0, 1), got {self.p_prime!r}")
        if not self.b > 0.0:
            raise ParameterError(f"b must be positive, got {self.b!r}")
        if self.beta0 is not None and not self.beta0 > 0.0:
            raise ParameterError(f"beta0 must be positive, got {self.beta0!r}")
        _check_budget(self.max_iters, self.tol)


@dataclass(frozen=True)
class AcceleratedParams:
    """Schedule and budget for the momentum method.

    theta_k = t / (k + t), beta_k = beta_0 * b / (k + b) componentwise, and
    gamma_{x,k} = beta_{y,k} / (2 beta_{x,k} beta_{y,k} + op_norm^2) (and
    symmetrically for y). Requires t >= 2, b >= t, and the admissibility
    ratio cbar = beta_x0 * beta_y0 * b^2 / (t * op_norm^2) < 1. The initial
    pair defaults to op_norm / 4 on both components (cbar = b^2 / (16 t)).
    """

    t: float = 2.0
    b: float = 4.0
    beta_x0: Optional[float] = None
    beta_y0: Optional[float] = None
    max_iters: int = 10_000
    tol: float = 0.0

    def __post_init__(self):
        if not self.t >= 2.0:
            raise ParameterError(f"t must be >= 2, got {self.t!r}")
        if not self.b >= self.t:
            raise ParameterError(f"b must be >= t, got b={self.b!r}, t={self.t!r}")
        if (self.beta_x0 is None) != (self.beta_y0 is None):
            raise ParameterError("beta_x0 and beta_y0 must be given together")
        if self.beta_x0 is not None and not (self.beta_x0 > 0.0 and self.beta_y0 > 0.0):
            raise ParameterError("initial smoothing pair must be positive")
        _check_budget(self.max_iters, self.tol)

    def resolve_beta0(self, op_norm: float) -> tuple[float, float]:
        if op_norm <= 0.0:
            raise ParameterError("coupling operator norm must be positive")
        if self.beta_x0 is None:
            return (op_norm / 4.0, op_norm / 4.0)
        return (self.beta_x0, self.beta_y0)

    def cbar(self, op_norm: float) -> float:
        """Admissibility ratio; the schedule is valid only when this is < 1."""
        bx0, by0 = self.resolve_beta0(op_norm)
        return bx0 * by0 * self.b ** 2 / (self.t * op_norm ** 2)


@dataclass(frozen=True)
class RestartParams:
    """Restarted momentum method: inner schedule plus the restart threshold.

    A restart is triggered at the first recorded iterate whose
    G_{beta_0} falls below restart_factor^(s+1) times the starting gap,
    where s counts restarts so far; the budget and tolerance come from
    ``inner``.
    """

    inner: AcceleratedParams = field(default_factory=AcceleratedParams)
    restart_factor: float = 0.5

    def __post_init__(self):
        if not 0.0 < self.restart_factor < 1.0:
            raise ParameterError(
                f"restart_factor must lie in (0, 1), got {self.restart_factor!r}")


def _check_budget(max_iters, tol):
    if max_iters < 0:
        raise ParameterError(f"max_iters must be nonnegative, got {max_iters!r}")
    if not tol >= 0.0:
        raise ParameterError(f"tol must be nonnegative, got {tol!r}")


def prox_grad_schedule(k: int, params: ProxGradParams, op_norm: float
                       ) -> tuple[SmoothingPair, StepPair]:
    """Smoothing pair and step pair for iteration k of the basic method."""
    if k < 0:
        raise ParameterError(f"iteration index must be nonnegative, got {k}")
    if op_norm <= 0.0:
        raise ParameterError("coupling operator norm must be positive")
    if params.beta0 is not None:
        scale = params.beta0
    else:
        scale = op_norm * math.sqrt(params.p_prime / (params.b + params.p_prime))
    beta = scale / math.sqrt(k + params.b)
    gamma = beta / (op_norm * op_norm + 2.0 * beta * beta)
    return SmoothingPair(beta, beta), StepPair(gamma, gamma)


def accelerated_schedule(k: int, params: AcceleratedParams, op_norm: float
                         ) -> tuple[float, SmoothingPair, StepPair]:
    """(theta_k, beta_k, gamma_k) for iteration k of the momentum method."""
    if k < 0:
        raise ParameterError(f"iteration index must be nonnegative, got {k}")
    bx0, by0 = params.resolve_beta0(op_norm)
    theta = params.t / (k + params.t)
    shrink = params.b / (k + params.b)
    bx = bx0 * shrink
    by = by0 * shrink
    denom = 2.0 * bx * by + op_norm * op_norm
    return theta, SmoothingPair(bx, by), StepPair(by / denom, bx / denom)


@dataclass(frozen=True)
class ConvergenceRecord:
    """One monitored iterate.

    gap_beta0 is G at the run's initial smoothing pair (the stopping and
    restart quantity); gap_betak is G at the current schedule level;
    step_norm is the distance between the last two iterates (0.0 at k = 0);
    restarted marks iterates where a restart fired; epoch counts restarts so
    far. gap_report optionally carries G at a caller-chosen reporting pair.
    """

    iter: int
    elapsed_s: float
    gap_beta0: float
    gap_betak: float
    step_norm: float
    restarted: bool
    epoch: int
    gap_report: Optional[float] = None


class IterationObserver(Protocol):
    """Per-record callback; return truthy to request an early stop."""

    def __call__(self, record: ConvergenceRecord) -> Optional[bool]:
        ...


@dataclass
class SolveResult:
    """Final point, the monitored records, and how the run ended.

    converged is True only when the G_{beta_0} <= tol stopping rule fired;
    an observer stop or an exhausted budget leaves it False. iterations is
    the index of the final iterate.
    """

    point: PrimalDualPoint
    records: list[ConvergenceRecord]
    converged: bool
    iterations: int


def start_point(problem: SaddleProblem, z0: Optional[PrimalDualPoint]) -> PrimalDualPoint:
    """z0, or the origin when omitted, pulled into dom F if needed.

    A single unit-step blockwise prox lands in the domain of each piece, and
    is the identity on points already inside.
    """
    if z0 is None:
        z0 = PrimalDualPoint.zeros(problem.n, problem.m)
    if math.isfinite(problem.objective_value(z0)):
        return z0
    return problem.prox(1.0, z0)


def _emit(records, observer, rec) -> bool:
    records.append(rec)
    if observer is None:
        return False
    return bool(observer(rec))


def _report_gap(problem, report_beta, z, cxy):
    if report_beta is None:
        return None
    return sg.gap_value(problem, report_beta, z, cxy)


def run_prox_grad(problem: SaddleProblem, z0: Optional[PrimalDualPoint] = None,
                  params: Optional[ProxGradParams] = None,
                  observer: Optional[IterationObserver] = None, *,
                  stride: int = 1,
                  report_beta: Optional[SmoothingPair] = None) -> SolveResult:
    """Proximal gradient on the smooth gap component with continuation."""
    params = params if params is not None else ProxGradParams()
    _check_stride(stride)
    op_norm = problem.op_norm
    beta0, _ = prox_grad_schedule(0, params, op_norm)
    z = prev = start_point(problem, z0)
    records: list[ConvergenceRecord] = []
    t0 = time.perf_counter()
    converged = False
    k = 0
    while True:
        final = k >= params.max_iters
        due = final or k % stride == 0
        beta_k, gamma_k = prox_grad_schedule(k, params, op_norm)
        ev = None
        stop = False
        if due:
            cxy = (problem.coupling.apply(z.x), problem.coupling.apply_adjoint(z.y))
            ev = sg.gap(problem, beta_k, z, cxy)
            g0 = sg.gap_value(problem, beta0, z, cxy)
            rec = ConvergenceRecord(
                iter=k, elapsed_s=time.perf_counter() - t0, gap_beta0=g0,
                gap_betak=ev.gap, step_norm=(z - prev).norm(), restarted=False,
                epoch=0, gap_report=_report_gap(problem, report_beta, z, cxy))
            stop = _emit(records, observer, rec)
            if g0 <= params.tol:
                converged = True
                stop = True
        if stop or final:
            break
        if ev is None:
            ev = sg.gap(problem, beta_k, z)
        prev = z
        z = problem.prox(gamma_k, PrimalDualPoint(
            z.x - gamma_k.gamma_x * ev.grad.x, z.y - gamma_k.gamma_y * ev.grad.y))
        k += 1
    return SolveResult(point=z, records=records, converged=converged, iterations=k)


def run_accelerated(problem: SaddleProblem, z0: Optional[PrimalDualPoint] = None,
                    params: Optional[AcceleratedParams] = None,
                    observer: Optional[IterationObserver] = None, *,
                    stride: int = 1,
                    report_beta: Optional[SmoothingPair] = None) -> SolveResult:
    """Momentum method on the smooth gap component with continuation."""
    params = params if params is not None else AcceleratedParams()
    _check_stride(stride)
    op_norm = problem.op_norm
    _check_admissible(params, op_norm)
    bx0, by0 = params.resolve_beta0(op_norm)
    beta0 = SmoothingPair(bx0, by0)
    z = zb = prev = start_point(problem, z0)
    records: list[ConvergenceRecord] = []
    t0 = time.perf_counter()
    converged = False
    k = 0
    while True:
        final = k >= params.max_iters
        due = final or k % stride == 0
        theta, beta_k, gamma_k = accelerated_schedule(k, params, op_norm)
        stop = False
        if due:
            cxy = (problem.coupling.apply(z.x), problem.coupling.apply_adjoint(z.y))
            g0 = sg.gap_value(problem, beta0, z, cxy)
            gk = sg.gap_value(problem, beta_k, z, cxy)
            rec = ConvergenceRecord(
                iter=k, elapsed_s=time.perf_counter() - t0, gap_beta0=g0,
                gap_betak=gk, step_norm=(z - prev).norm(), restarted=False,
                epoch=0, gap_report=_report_gap(problem, report_beta, z, cxy))
            stop = _emit(records, observer, rec)
            if g0 <= params.tol:
                converged = True
                stop = True
        if stop or final:
            break
        prev = z
        z, zb = _accelerated_step(problem, z, zb, theta, beta_k, gamma_k)
        k += 1
    return SolveResult(point=z, records=records, converged=converged, iterations=k)


def run_restarted(problem: SaddleProblem, z0: Optional[PrimalDualPoint] = None,
                  params: Optional[RestartParams] = None,
                  observer: Optional[IterationObserver] = None, *,
                  stride: int = 1,
                  report_beta: Optional[SmoothingPair] = None) -> SolveResult:
    """Momentum method restarted on geometric decrease of G_{beta_0}.

    After s restarts, a fresh restart fires at the first recorded iterate
    with G_{beta_0}(z_k) <= restart_factor^(s+1) * G_{beta_0}(z_0); several
    thresholds may be crossed at once. On restart the averaged point is reset
    to the current iterate and the schedule index starts over.
    """
    params = params if params is not None else RestartParams()
    inner = params.inner
    _check_stride(stride)
    op_norm = problem.op_norm
    _check_admissible(inner, op_norm)
    bx0, by0 = inner.resolve_beta0(op_norm)
    beta0 = SmoothingPair(bx0, by0)
    z = zb = prev = start_point(problem, z0)
    records: list[ConvergenceRecord] = []
    t0 = time.perf_counter()
    converged = False
    gap_start = None
    s = 0
    k_s = 0
    k = 0
    while True:
        final = k >= inner.max_iters
        due = final or k % stride == 0
        stop = False
        if due:
            cxy = (problem.coupling.apply(z.x), problem.coupling.apply_adjoint(z.y))
            g0 = sg.gap_value(problem, beta0, z, cxy)
            if gap_start is None:
                gap_start = g0
            restarted = False
            if g0 > inner.tol:
                # Strictly positive here (tol >= 0), so the threshold loop
                # below terminates.
                while g0 <= params.restart_factor ** (s + 1) * gap_start:
                    s += 1
                    k_s = k
                    zb = z
                    restarted = True
            theta, beta_j, gamma_j = accelerated_schedule(k - k_s, inner, op_norm)
            gk = sg.gap_value(problem, beta_j, z, cxy)
            rec = ConvergenceRecord(
                iter=k, elapsed_s=time.perf_counter() - t0, gap_beta0=g0,
                gap_betak=gk, step_norm=(z - prev).norm(), restarted=restarted,
                epoch=s, gap_report=_report_gap(problem, report_beta, z, cxy))
            stop = _emit(records, observer, rec)
            if g0 <= inner.tol:
                converged = True
                stop = True
        else:
            theta, beta_j, gamma_j = accelerated_schedule(k - k_s, inner, op_norm)
        if stop or final:
            break
        prev = z
        z, zb = _accelerated_step(problem, z, zb, theta, beta_j, gamma_j)
        k += 1
    return SolveResult(point=z, records=records, converged=converged, iterations=k)


def _accelerated_step(problem, z, zb, theta, beta, gamma):
    """One momentum update; returns the new (iterate, averaged point)."""
    zhat = (1.0 - theta) * z + theta * zb
    ghat = sg.gap(problem, beta, zhat).grad
    step = StepPair(gamma.gamma_x / theta, gamma.gamma_y / theta)
    zb_new = problem.prox(step, PrimalDualPoint(
        zb.x - step.gamma_x * ghat.x, zb.y - step.gamma_y * ghat.y))
    z_new = (1.0 - theta) * z + theta * zb_new
    return z_new, zb_new


def _check_admissible(params: AcceleratedParams, op_norm: float) -> None:
    cbar = params.cbar(op_norm)
    if not cbar < 1.0:
        raise ParameterError(
            f"admissibility ratio cbar = {cbar:.6g} must be < 1; "
            "pass a smaller initial smoothing pair")


def _check_stride(stride: int) -> None:
    if stride < 1:
        raise ParameterError(f"stride must be >= 1, got {stride!r}")
