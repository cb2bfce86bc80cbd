"""Primal-dual points, weighted norms, the coupling operator, and its norm.

The saddle problem is min_x max_y f(x) + <Ax, y> - g*(y). Everything downstream
works on the concatenated point z = (x, y), the block-diagonal weighted norm
||z||_w^2 = w_x ||x||^2 + w_y ||y||^2, and the skew pairing operator
M z = (-A^T y, A x).
"""

from __future__ import annotations

import abc
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.sparse as sp

from .errors import DimensionError

# Coupling matrices with at most this many entries are stored dense.
DENSE_ENTRY_LIMIT = 10_000

POWER_ITERS = 200
POWER_REL_TOL = 1e-9
POWER_SEED = 42


def _as_vector(v, name):
    arr = np.asarray(v, dtype=float)
    if arr.ndim != 1:
        raise DimensionError(f"{name} must be 1-dimensional, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite entries")
    return arr


@dataclass(frozen=True)
class PrimalDualPoint:
    """Immutable pair z = (x, y); entries are finite floats."""

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "x", _as_vector(self.x, "x"))
        object.__setattr__(self, "y", _as_vector(self.y, "y"))

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def m(self) -> int:
        return self.y.shape[0]

    def __add__(self, other: "PrimalDualPoint") -> "PrimalDualPoint":
        return PrimalDualPoint(self.x + other.x, self.y + other.y)

    def __sub__(self, other: "PrimalDualPoint") -> "PrimalDualPoint":
        return PrimalDualPoint(self.x - other.x, self.y - other.y)

    def __mul__(self, a) -> "PrimalDualPoint":
        return PrimalDualPoint(a * self.x, a * self.y)

    __rmul__ = __mul__

    def dot(self, other: "PrimalDualPoint") -> float:
        return float(self.x @ other.x + self.y @ other.y)

    def norm(self) -> float:
        return float(np.sqrt(self.x @ self.x + self.y @ self.y))

    @staticmethod
    def zeros(n: int, m: int) -> "PrimalDualPoint":
        return PrimalDualPoint(np.zeros(n), np.zeros(m))


def _positive_pair(a, b, names):
    for v, name in zip((a, b), names):
        if not (np.isfinite(v) and v > 0.0):
            raise ValueError(f"{name} must be positive and finite, got {v!r}")


@dataclass(frozen=True)
class SmoothingPair:
    """Componentwise smoothing weights (beta_x, beta_y), both positive."""

    beta_x: float
    beta_y: float

    def __post_init__(self):
        _positive_pair(self.beta_x, self.beta_y, ("beta_x", "beta_y"))

    @property
    def weights(self) -> tuple[float, float]:
        return (self.beta_x, self.beta_y)

    def scaled(self, s: float) -> "SmoothingPair":
        return SmoothingPair(s * self.beta_x, s * self.beta_y)

    def inverse(self) -> "SmoothingPair":
        return SmoothingPair(1.0 / self.beta_x, 1.0 / self.beta_y)


@dataclass(frozen=True)
class StepPair:
    """Componentwise step sizes (gamma_x, gamma_y), both positive."""

    gamma_x: float
    gamma_y: float

    def __post_init__(self):
        _positive_pair(self.gamma_x, self.gamma_y, ("gamma_x", "gamma_y"))

    @property
    def weights(self) -> tuple[float, float]:
        return (self.gamma_x, self.gamma_y)

    def inverse(self) -> "StepPair":
        return StepPair(1.0 / self.gamma_x, 1.0 / self.gamma_y)


def weighted_norm_sq(z: PrimalDualPoint, w) -> float:
    """||z||_w^2 with blockwise weights.

    ``w`` is a SmoothingPair, a StepPair, or a plain (w_x, w_y) tuple with
    nonnegative entries (tuples let callers use derived weights that the pair
    classes would reject as non-positive).
    """
    wx, wy = w.weights if hasattr(w, "weights") else w
    if wx < 0.0 or wy < 0.0:
        raise ValueError(f"weights must be nonnegative, got ({wx!r}, {wy!r})")
    return float(wx * (z.x @ z.x) + wy * (z.y @ z.y))


class ProxCapable(abc.ABC):
    """A closed convex function h with an explicit proximal map.

    prox(tau, v) returns argmin_w h(w) + ||w - v||^2 / (2 tau); the result lies
    in dom h. value(v) is the extended-real value, +inf outside the domain.
    ``dim`` is the ambient dimension.
    """

    dim: int

    @abc.abstractmethod
    def prox(self, tau: float, v: np.ndarray) -> np.ndarray:
        ...

    @abc.abstractmethod
    def value(self, v: np.ndarray) -> float:
        ...


class MatrixCoupling:
    """The coupling operator A, stored dense below DENSE_ENTRY_LIMIT entries.

    Exposes matvecs with A and A^T and a cached operator-norm estimate. The
    adjoint is materialized once; both backends keep the two matvecs to a
    single BLAS/sparse call each.
    """

    def __init__(self, matrix):
        if sp.issparse(matrix):
            mat = matrix.tocsr()
            if mat.shape[0] * mat.shape[1] <= DENSE_ENTRY_LIMIT:
                mat = mat.toarray()
        else:
            mat = np.asarray(matrix, dtype=float)
            if mat.ndim != 2:
                raise DimensionError(f"coupling must be 2-dimensional, got shape {mat.shape}")
            if mat.shape[0] * mat.shape[1] > DENSE_ENTRY_LIMIT:
                mat = sp.csr_array(mat)
        if sp.issparse(mat):
            self._a = mat
            self._at = mat.T.tocsr()
        else:
            self._a = np.ascontiguousarray(mat, dtype=float)
            self._at = np.ascontiguousarray(self._a.T)
        self.shape = (int(mat.shape[0]), int(mat.shape[1]))

    @classmethod
    def from_dense(cls, matrix) -> "MatrixCoupling":
        return cls(np.asarray(matrix, dtype=float))

    @classmethod
    def from_triplets(cls, m, n, rows, cols, vals) -> "MatrixCoupling":
        rows = np.asarray(rows, dtype=int)
        cols = np.asarray(cols, dtype=int)
        vals = np.asarray(vals, dtype=float)
        if rows.size and (rows.min() < 0 or rows.max() >= m):
            raise DimensionError("triplet row index out of range")
        if cols.size and (cols.min() < 0 or cols.max() >= n):
            raise DimensionError("triplet column index out of range")
        coo = sp.coo_array((vals, (rows, cols)), shape=(m, n))
        return cls(coo.tocsr())

    @property
    def is_sparse(self) -> bool:
        return sp.issparse(self._a)

    def apply(self, x: np.ndarray) -> np.ndarray:
        if x.shape != (self.shape[1],):
            raise DimensionError(f"expected x of shape ({self.shape[1]},), got {x.shape}")
        return self._a @ x

    def apply_adjoint(self, y: np.ndarray) -> np.ndarray:
        if y.shape != (self.shape[0],):
            raise DimensionError(f"expected y of shape ({self.shape[0]},), got {y.shape}")
        return self._at @ y

    def dense(self) -> np.ndarray:
        return self._a.toarray() if self.is_sparse else self._a.copy()

    @cached_property
    def op_norm(self) -> float:
        return estimate_op_norm(self)


def estimate_op_norm(coupling, iters: int = POWER_ITERS, tol: float = POWER_REL_TOL,
                     seed: int = POWER_SEED) -> float:
    """Largest singular value of A by power iteration on A^T A.

    Deterministic for a fixed seed. Stops early once the relative change in
    the estimate falls below ``tol``. Returns 0.0 for a zero operator.
    """
    m, n = coupling.shape
    if m == 0 or n == 0:
        return 0.0
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(n)
    v /= np.linalg.norm(v)
    sigma = 0.0
    for _ in range(iters):
        w = coupling.apply(v)
        sigma_new = float(np.linalg.norm(w))
        if sigma_new == 0.0:
            # v is in the null space; a repeated random restart would be
            # needed for adversarial A, but a Gaussian start hits the nullspace
            # only for A = 0.
            return 0.0
        u = coupling.apply_adjoint(w)
        v = u / np.linalg.norm(u)
        if abs(sigma_new - sigma) <= tol * sigma_new:
            return sigma_new
        sigma = sigma_new
    return sigma


class SaddleProblem:
    """min_x max_y f(x) + <Ax, y> - g*(y) with proxable f and g*."""

    def __init__(self, f: ProxCapable, gstar: ProxCapable, coupling: MatrixCoupling):
        m, n = coupling.shape
        if getattr(f, "dim", n) != n:
            raise DimensionError(f"f has dim {f.dim}, coupling expects {n}")
        if getattr(gstar, "dim", m) != m:
            raise DimensionError(f"g* has dim {gstar.dim}, coupling expects {m}")
        self.f = f
        self.gstar = gstar
        self.coupling = coupling
        self.n = n
        self.m = m

    @property
    def op_norm(self) -> float:
        return self.coupling.op_norm

    def objective_value(self, z: PrimalDualPoint) -> float:
        """f(x) + g*(y), +inf outside the domain."""
        return self.f.value(z.x) + self.gstar.value(z.y)

    def prox(self, tau, z: PrimalDualPoint) -> PrimalDualPoint:
        """Blockwise proximal step on f and g*; tau is a scalar or StepPair."""
        tx, ty = tau.weights if hasattr(tau, "weights") else (tau, tau)
        return PrimalDualPoint(self.f.prox(tx, z.x), self.gstar.prox(ty, z.y))


def apply_M(problem: SaddleProblem, z: PrimalDualPoint) -> PrimalDualPoint:
    """The skew pairing operator M z = (-A^T y, A x); <Mz, z> = 0 for all z."""
    if z.n != problem.n or z.m != problem.m:
        raise DimensionError(
            f"point has dims ({z.n}, {z.m}), problem expects ({problem.n}, {problem.m})")
    return PrimalDualPoint(-problem.coupling.apply_adjoint(z.y),
                           problem.coupling.apply(z.x))
