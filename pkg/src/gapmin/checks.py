"""Seeded self-diagnostics for a loaded problem.

Each check exercises one structural identity or inequality the gap machinery
relies on, at random points, and reports a signed margin: how far inside the
allowed region the worst sample landed (positive means pass, with room).
`cmd_check` prints one line per check and fails the process if any margin is
negative.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import smoothed_gap as sg
from .core import PrimalDualPoint, SaddleProblem, SmoothingPair, StepPair, apply_M, weighted_norm_sq

# Random smoothing levels stay in this window: far smaller betas amplify
# floating-point cancellation in the gap (error scales like ||Mz||^2 / beta)
# past the thresholds below without saying anything about correctness.
BETA_RANGE = (0.05, 10.0)

ADJOINT_TOL = 1e-10
SKEW_TOL = 1e-10
NONNEG_FLOOR = 1e-9
SHRINK_SLACK = 1e-9
SENSITIVITY_TOL = 1e-4
GRAD_TOL = 1e-5
LIPSCHITZ_SLACK = 1e-6


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    margin: float
    detail: str


def _random_point(problem, rng, scale=1.0) -> PrimalDualPoint:
    raw = PrimalDualPoint(scale * rng.standard_normal(problem.n),
                          scale * rng.standard_normal(problem.m))
    # Pull into dom F so gap values are finite.
    return problem.prox(1.0, raw)


def _random_beta(rng) -> SmoothingPair:
    lo, hi = np.log(BETA_RANGE)
    return SmoothingPair(float(np.exp(rng.uniform(lo, hi))),
                         float(np.exp(rng.uniform(lo, hi))))


def check_adjoint(problem: SaddleProblem, seed: int = 0, samples: int = 20) -> CheckResult:
    """<Ax, y> == <x, A^T y> up to rounding, scaled by the operand norms."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(samples):
        x = rng.standard_normal(problem.n)
        y = rng.standard_normal(problem.m)
        lhs = float(problem.coupling.apply(x) @ y)
        rhs = float(x @ problem.coupling.apply_adjoint(y))
        denom = max(np.linalg.norm(x) * np.linalg.norm(y), 1e-30)
        worst = max(worst, abs(lhs - rhs) / denom)
    return CheckResult("adjoint", worst <= ADJOINT_TOL, ADJOINT_TOL - worst,
                       f"max relative adjoint mismatch {worst:.3e}")


def check_skew(problem: SaddleProblem, seed: int = 0, samples: int = 20) -> CheckResult:
    """<Mz, z> == 0 up to rounding, scaled by ||z||^2."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(samples):
        z = PrimalDualPoint(rng.standard_normal(problem.n),
                            rng.standard_normal(problem.m))
        worst = max(worst, abs(apply_M(problem, z).dot(z)) / max(z.dot(z), 1e-30))
    return CheckResult("skew", worst <= SKEW_TOL, SKEW_TOL - worst,
                       f"max relative skew defect {worst:.3e}")


def check_gap_nonneg(problem: SaddleProblem, seed: int = 0, samples: int = 100) -> CheckResult:
    """G_beta(z) >= 0 for feasible z, up to the numerical floor."""
    rng = np.random.default_rng(seed)
    worst = np.inf
    for _ in range(samples):
        z = _random_point(problem, rng, scale=float(rng.uniform(0.1, 3.0)))
        worst = min(worst, sg.gap_value(problem, _random_beta(rng), z))
    return CheckResult("gap-nonneg", worst >= -NONNEG_FLOOR, worst + NONNEG_FLOOR,
                       f"min sampled gap {worst:.3e}")


def check_comparison_bound(problem: SaddleProblem, seed: int = 0, samples: int = 50) -> CheckResult:
    """G_{beta'} >= (2 - max ratio) G_beta when the max ratio is >= 1.

    This is the regime the continuation analysis uses (comparing the gap at
    the previous, larger smoothing level); for strictly shrinking pairs the
    compound bound does not hold in general, only the tangent bound that
    check_sensitivity exercises through the envelope derivatives.
    """
    rng = np.random.default_rng(seed)
    worst = np.inf
    for _ in range(samples):
        z = _random_point(problem, rng)
        beta = _random_beta(rng)
        rx, ry = rng.uniform(0.4, 2.0, size=2)
        if max(rx, ry) < 1.0:
            rx = 1.0 / rx
        grown = SmoothingPair(beta.beta_x * rx, beta.beta_y * ry)
        g_new = sg.gap_value(problem, grown, z)
        g_old = sg.gap_value(problem, beta, z)
        worst = min(worst, g_new - (2.0 - max(rx, ry)) * g_old)
    return CheckResult("comparison-bound", worst >= -SHRINK_SLACK, worst + SHRINK_SLACK,
                       f"min comparison-bound slack {worst:.3e}")


def check_sensitivity(problem: SaddleProblem, seed: int = 0, samples: int = 20) -> CheckResult:
    """Envelope derivatives in beta match central finite differences."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(samples):
        z = _random_point(problem, rng)
        beta = _random_beta(rng)
        got = sg.gap_beta_sensitivity(problem, beta, z)
        for axis in (0, 1):
            h = 1e-5 * beta.weights[axis]
            bumped = [list(beta.weights), list(beta.weights)]
            bumped[0][axis] += h
            bumped[1][axis] -= h
            fd = (sg.gap_value(problem, SmoothingPair(*bumped[0]), z)
                  - sg.gap_value(problem, SmoothingPair(*bumped[1]), z)) / (2.0 * h)
            scale = max(abs(got[axis]), abs(fd), 1e-12)
            worst = max(worst, abs(got[axis] - fd) / scale)
    return CheckResult("beta-sensitivity", worst <= SENSITIVITY_TOL,
                       SENSITIVITY_TOL - worst,
                       f"max relative sensitivity mismatch {worst:.3e}")


def check_grad(problem: SaddleProblem, seed: int = 0, samples: int = 10) -> CheckResult:
    """Smooth-part gradient matches directional finite differences."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(samples):
        z = _random_point(problem, rng)
        beta = _random_beta(rng)
        ev = sg.gap(problem, beta, z)
        d = PrimalDualPoint(rng.standard_normal(problem.n),
                            rng.standard_normal(problem.m))
        d = (1.0 / d.norm()) * d
        h = 1e-6 * (1.0 + z.norm())
        up = sg.gap(problem, beta, z + h * d).smooth_part
        down = sg.gap(problem, beta, z - h * d).smooth_part
        fd = (up - down) / (2.0 * h)
        got = ev.grad.dot(d)
        scale = max(abs(got), abs(fd), 1e-8 * max(1.0, ev.grad.norm()))
        worst = max(worst, abs(got - fd) / scale)
    return CheckResult("gradient", worst <= GRAD_TOL, GRAD_TOL - worst,
                       f"max relative directional-derivative mismatch {worst:.3e}")


def check_midpoint_weak_convexity(problem: SaddleProblem, seed: int = 0,
                                  samples: int = 50) -> CheckResult:
    """smooth_part + 0.5||.-z||_beta^2 satisfies midpoint convexity."""
    rng = np.random.default_rng(seed)
    worst = np.inf
    for _ in range(samples):
        beta = _random_beta(rng)
        z1 = _random_point(problem, rng)
        z2 = _random_point(problem, rng)
        mid = 0.5 * (z1 + z2)
        lhs = 0.5 * (_wc_value(problem, beta, z1) + _wc_value(problem, beta, z2))
        worst = min(worst, lhs - _wc_value(problem, beta, mid))
    return CheckResult("weak-convexity", worst >= -NONNEG_FLOOR, worst + NONNEG_FLOOR,
                       f"min midpoint-convexity slack {worst:.3e}")


def _wc_value(problem, beta, z, anchor=None):
    """smooth_part(z) + 0.5 ||z - anchor||_beta^2; anchor defaults to 0."""
    v = sg.gap(problem, beta, z).smooth_part
    shift = z if anchor is None else z - anchor
    return v + 0.5 * weighted_norm_sq(shift, beta)


def check_lipschitz(problem: SaddleProblem, seed: int = 0, samples: int = 50) -> CheckResult:
    """Gradient differences obey the metric-pair Lipschitz model."""
    rng = np.random.default_rng(seed)
    op = problem.op_norm
    worst = np.inf
    for _ in range(samples):
        beta = _random_beta(rng)
        gamma = StepPair(float(np.exp(rng.uniform(np.log(0.05), np.log(10.0)))),
                         float(np.exp(rng.uniform(np.log(0.05), np.log(10.0)))))
        lip = sg.lipschitz_constant(beta, gamma, op)
        z1 = _random_point(problem, rng)
        z2 = _random_point(problem, rng)
        dgrad = sg.gap(problem, beta, z1).grad - sg.gap(problem, beta, z2).grad
        lhs = np.sqrt(weighted_norm_sq(dgrad, gamma))
        rhs = lip * np.sqrt(weighted_norm_sq(z1 - z2, gamma.inverse()))
        worst = min(worst, (rhs * (1.0 + LIPSCHITZ_SLACK) - lhs) / max(rhs, 1e-30))
    return CheckResult("lipschitz", worst >= 0.0, worst,
                       f"min normalized Lipschitz slack {worst:.3e}")


ALL_CHECKS = (check_adjoint, check_skew, check_gap_nonneg, check_comparison_bound,
              check_sensitivity, check_grad, check_midpoint_weak_convexity,
              check_lipschitz)


def run_problem_checks(problem: SaddleProblem, seed: int = 0) -> list[CheckResult]:
    return [check(problem, seed=seed) for check in ALL_CHECKS]
