"""The smoothed duality gap centered at the query point.

For F(z) = f(x) + g*(y) and the skew pairing M, the smoothed gap is

    G_beta(z) = F(z) + sup_w [ <Mz, w> - F(w) - 0.5 ||z - w||_beta^2 ].

The supremum is attained at zbar_beta(z), computable by one blockwise prox:

    xbar = prox_{f, 1/beta_x}(x - A^T y / beta_x)
    ybar = prox_{g*, 1/beta_y}(y + A x / beta_y).

G_beta is nonnegative everywhere and zero exactly at saddle points. Its smooth
component (the supremum) has gradient -M zbar + beta (zbar - z), is 1-weakly
convex in the beta-norm, and its gradient is Lipschitz in the metric pair
(beta, gamma) with the constant computed by lipschitz_constant().
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import PrimalDualPoint, SaddleProblem, SmoothingPair, StepPair


@dataclass(frozen=True)
class GapEvaluation:
    """Everything one gap evaluation produces.

    gap = value + smooth_part where value = F(z) (may be +inf for z outside
    dom F, making gap +inf); smooth_part is the smoothed conjugate term; grad
    is the gradient of smooth_part at z.
    """

    zbar: PrimalDualPoint
    gap: float
    smooth_part: float
    grad: PrimalDualPoint


def _coupling_at(problem, z, coupling_xy):
    if coupling_xy is None:
        return problem.coupling.apply(z.x), problem.coupling.apply_adjoint(z.y)
    return coupling_xy


def compute_zbar(problem: SaddleProblem, beta: SmoothingPair, z: PrimalDualPoint,
                 coupling_xy=None) -> PrimalDualPoint:
    """The maximizer zbar_beta(z) of the smoothed conjugate problem.

    ``coupling_xy`` optionally supplies precomputed (A x, A^T y) so callers
    evaluating several betas at one point pay for the matvecs once.
    """
    ax, aty = _coupling_at(problem, z, coupling_xy)
    xbar = problem.f.prox(1.0 / beta.beta_x, z.x - aty / beta.beta_x)
    ybar = problem.gstar.prox(1.0 / beta.beta_y, z.y + ax / beta.beta_y)
    return PrimalDualPoint(xbar, ybar)


def _evaluate(problem, beta, z, ax, aty):
    """(zbar, gap, smooth_part) without the gradient matvecs.

    The pairing term is accumulated as <Mz, zbar - z>; the <Mz, z> part is
    identically zero by skew symmetry and dropping it removes the worst
    cancellation (||Mz||^2 / beta sized intermediates) near convergence.
    """
    zbar = compute_zbar(problem, beta, z, (ax, aty))
    dx = zbar.x - z.x
    dy = zbar.y - z.y
    pairing = float(-aty @ dx + ax @ dy)
    penalty = 0.5 * (beta.beta_x * float(dx @ dx) + beta.beta_y * float(dy @ dy))
    smooth_part = pairing - problem.f.value(zbar.x) - problem.gstar.value(zbar.y) - penalty
    return zbar, problem.objective_value(z) + smooth_part, smooth_part


def gap(problem: SaddleProblem, beta: SmoothingPair, z: PrimalDualPoint,
        coupling_xy=None) -> GapEvaluation:
    """Evaluate G_beta(z) along with zbar and the smooth-part gradient."""
    ax, aty = _coupling_at(problem, z, coupling_xy)
    zbar, gap_value, smooth_part = _evaluate(problem, beta, z, ax, aty)
    grad = PrimalDualPoint(
        problem.coupling.apply_adjoint(zbar.y) + beta.beta_x * (zbar.x - z.x),
        -problem.coupling.apply(zbar.x) + beta.beta_y * (zbar.y - z.y))
    return GapEvaluation(zbar=zbar, gap=gap_value, smooth_part=smooth_part, grad=grad)


def gap_value(problem: SaddleProblem, beta: SmoothingPair, z: PrimalDualPoint,
              coupling_xy=None) -> float:
    """G_beta(z) alone; skips the two matvecs the gradient would need.

    Monitoring loops evaluate the gap at several smoothing pairs per iterate;
    with ``coupling_xy`` supplied each extra pair costs only proxes.
    """
    ax, aty = _coupling_at(problem, z, coupling_xy)
    return _evaluate(problem, beta, z, ax, aty)[1]


def grad_smooth(problem: SaddleProblem, beta: SmoothingPair, z: PrimalDualPoint,
                coupling_xy=None) -> PrimalDualPoint:
    """Gradient of the smooth component: -M zbar + beta (zbar - z)."""
    return gap(problem, beta, z, coupling_xy).grad


def gap_beta_sensitivity(problem: SaddleProblem, beta: SmoothingPair,
                         z: PrimalDualPoint, coupling_xy=None) -> tuple[float, float]:
    """Partial derivatives of G_beta(z) in (beta_x, beta_y).

    By envelope differentiation these are -0.5 ||x - xbar||^2 and
    -0.5 ||y - ybar||^2; both are always <= 0, so shrinking beta never
    shrinks the gap.
    """
    zbar = compute_zbar(problem, beta, z, coupling_xy)
    dx = zbar.x - z.x
    dy = zbar.y - z.y
    return (-0.5 * float(dx @ dx), -0.5 * float(dy @ dy))


def lipschitz_constant(beta: SmoothingPair, gamma: StepPair, op_norm: float) -> float:
    """Lipschitz constant of the smooth-part gradient between the metric pair.

    Measures gradients in the gamma-norm against points in the inverse-gamma
    norm. Steps with gamma chosen so this constant is <= 1 give the standard
    descent guarantee.
    """
    bx, by = beta.weights
    gx, gy = gamma.weights
    sq = op_norm * op_norm
    cross = max(bx * gx + (gx / by) * sq, by * gy + (gy / bx) * sq)
    direct = max(bx * gx, by * gy)
    return cross + direct
