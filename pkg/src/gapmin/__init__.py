"""Saddle-point solving by direct minimization of the smoothed duality gap.

For min_x max_y f(x) + <Ax, y> - g*(y), the smoothed duality gap centered at
the query point is a nonnegative merit function that vanishes exactly at
saddle points and whose smooth component admits cheap gradients. This package
evaluates it, minimizes it with three proximal-gradient-type methods, ships
PDHG baselines, and ingests conic programs from a native text format or a
CBF subset.
"""

from .algorithms import (AcceleratedParams, ConvergenceRecord, IterationObserver,
                         ProxGradParams, RestartParams, SolveResult,
                         accelerated_schedule, prox_grad_schedule, run_accelerated,
                         run_prox_grad, run_restarted)
from .baselines import PdhgParams, RapdhgParams, run_pdhg, run_rapdhg
from .core import (MatrixCoupling, PrimalDualPoint, ProxCapable, SaddleProblem,
                   SmoothingPair, StepPair, apply_M, estimate_op_norm,
                   weighted_norm_sq)
from .errors import (ConePartitionError, DimensionError, GapminError,
                     ParameterError, ParseError, UnsupportedFormatError)
from .ingestion import (ConicProgram, ParseDiagnostics, parse_cbf_subset,
                        parse_native, serialize_native, to_saddle)
from .prox import (BlockLinear, ConeDescriptor, LinearFn, LinearPlusDualCone,
                   LinearPlusNonneg, project_soc, prox_linear,
                   prox_linear_dualcone, prox_linear_nonneg)
from .smoothed_gap import (GapEvaluation, compute_zbar, gap, gap_beta_sensitivity,
                           gap_value, grad_smooth, lipschitz_constant)

__version__ = "0.1.0"

__all__ = [
    "AcceleratedParams", "BlockLinear", "ConeDescriptor", "ConePartitionError",
    "ConicProgram", "ConvergenceRecord", "DimensionError", "GapEvaluation",
    "GapminError", "IterationObserver", "LinearFn", "LinearPlusDualCone",
    "LinearPlusNonneg", "MatrixCoupling", "ParameterError", "ParseDiagnostics",
    "ParseError", "PdhgParams", "PrimalDualPoint", "ProxCapable",
    "ProxGradParams", "RapdhgParams", "RestartParams", "SaddleProblem",
    "SmoothingPair", "SolveResult", "StepPair", "UnsupportedFormatError",
    "accelerated_schedule", "apply_M", "compute_zbar", "estimate_op_norm",
    "gap", "gap_beta_sensitivity", "gap_value", "grad_smooth",
    "lipschitz_constant", "parse_cbf_subset", "parse_native",
    "prox_grad_schedule", "prox_linear", "prox_linear_dualcone",
    "prox_linear_nonneg", "project_soc", "run_accelerated", "run_pdhg",
    "run_prox_grad", "run_rapdhg", "run_restarted", "serialize_native",
    "to_saddle", "weighted_norm_sq",
]
