"""Proximal pieces for conic programs in saddle form.

The primal term is f(x) = <c, x> plus the indicator of a variable cone; the
dual term is g*(y) = <b, y> plus the indicator of the dual cone K* of the row
cone K. All cones here are products of blocks drawn from a small closed set:
zero, free, nonneg, nonpos, and second-order cone blocks.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import ProxCapable
from .errors import ConePartitionError

CONE_KINDS = ("zero", "free", "nonneg", "nonpos", "soc")

# Membership slack for indicator values: a point within this distance of the
# cone (absolute, plus the same amount relative to the largest entry) counts
# as inside. Prox outputs are exact projections, so this only matters for
# externally supplied points sitting numerically on a boundary.
EPS_FEAS = 1e-9


@dataclass(frozen=True)
class ConeDescriptor:
    """One block of a product cone: a kind from CONE_KINDS and its dimension."""

    kind: str
    dim: int

    def __post_init__(self):
        if self.kind not in CONE_KINDS:
            raise ConePartitionError(f"unknown cone kind {self.kind!r}")
        if self.dim < 0:
            raise ConePartitionError(f"cone dim must be nonnegative, got {self.dim}")
        if self.kind == "soc" and self.dim < 2:
            raise ConePartitionError(f"soc blocks need dim >= 2, got {self.dim}")


def check_partition(cones, total: int, what: str) -> None:
    got = sum(c.dim for c in cones)
    if got != total:
        raise ConePartitionError(f"{what} cone blocks cover {got} of {total} indices")


def prox_linear(tau: float, c: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Prox of <c, .> on all of R^n: a plain gradient shift."""
    return v - tau * c


def prox_linear_nonneg(tau: float, c: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Prox of <c, .> + indicator(. >= 0): shift, then clamp."""
    return np.maximum(v - tau * c, 0.0)


def project_soc(v: np.ndarray) -> np.ndarray:
    """Euclidean projection onto {(t, u) : ||u|| <= t}."""
    t = v[0]
    u = v[1:]
    nu = float(np.linalg.norm(u))
    if nu <= t:
        return v.copy()
    if nu <= -t:
        return np.zeros_like(v)
    s = 0.5 * (t + nu)
    out = np.empty_like(v)
    out[0] = s
    out[1:] = (s / nu) * u
    return out


# Projections onto each cone kind and onto its dual. The zero cone and the
# free cone are mutually dual; the remaining kinds are self-dual.
def _project_block(kind: str, w: np.ndarray, dual: bool) -> np.ndarray:
    if kind == "zero":
        kind = "free" if dual else "zero"
    elif kind == "free":
        kind = "zero" if dual else "free"
    if kind == "zero":
        return np.zeros_like(w)
    if kind == "free":
        return w
    if kind == "nonneg":
        return np.maximum(w, 0.0)
    if kind == "nonpos":
        return np.minimum(w, 0.0)
    return project_soc(w)


def project_cone_blocks(cones, w: np.ndarray, dual: bool = False) -> np.ndarray:
    """Blockwise projection of w onto the product cone (or its dual)."""
    check_partition(cones, w.shape[0], "projection")
    out = np.empty_like(w)
    at = 0
    for cone in cones:
        stop = at + cone.dim
        out[at:stop] = _project_block(cone.kind, w[at:stop], dual)
        at = stop
    return out


def cone_violation(cones, w: np.ndarray, dual: bool = False) -> float:
    """Euclidean distance from w to the product cone (or its dual)."""
    return float(np.linalg.norm(w - project_cone_blocks(cones, w, dual)))


def prox_linear_dualcone(tau: float, b: np.ndarray, cones, v: np.ndarray) -> np.ndarray:
    """Prox of <b, .> + indicator(. in K*): shift, then project onto K*."""
    return project_cone_blocks(cones, v - tau * b, dual=True)


def _feas_tol(v: np.ndarray) -> float:
    scale = float(np.max(np.abs(v), initial=0.0))
    return EPS_FEAS * (1.0 + scale)


class LinearFn(ProxCapable):
    """f(v) = <c, v> on all of R^n."""

    def __init__(self, c):
        self.c = np.asarray(c, dtype=float)
        self.dim = self.c.shape[0]

    def prox(self, tau, v):
        return prox_linear(tau, self.c, v)

    def value(self, v):
        return float(self.c @ v)


class LinearPlusNonneg(ProxCapable):
    """f(v) = <c, v> + indicator(v >= 0)."""

    def __init__(self, c):
        self.c = np.asarray(c, dtype=float)
        self.dim = self.c.shape[0]

    def prox(self, tau, v):
        return prox_linear_nonneg(tau, self.c, v)

    def value(self, v):
        if v.size and float(v.min()) < -_feas_tol(v):
            return float("inf")
        return float(self.c @ v)


class LinearPlusDualCone(ProxCapable):
    """g*(v) = <b, v> + indicator(v in K*), K a product of row cone blocks."""

    def __init__(self, b, cones):
        self.b = np.asarray(b, dtype=float)
        self.cones = tuple(cones)
        self.dim = self.b.shape[0]
        check_partition(self.cones, self.dim, "row")

    def prox(self, tau, v):
        return prox_linear_dualcone(tau, self.b, self.cones, v)

    def value(self, v):
        if cone_violation(self.cones, v, dual=True) > _feas_tol(v):
            return float("inf")
        return float(self.b @ v)


class BlockLinear(ProxCapable):
    """f(v) = <c, v> + indicator(v in K), K a product of variable cone blocks."""

    def __init__(self, c, cones):
        self.c = np.asarray(c, dtype=float)
        self.cones = tuple(cones)
        self.dim = self.c.shape[0]
        check_partition(self.cones, self.dim, "variable")

    def prox(self, tau, v):
        return project_cone_blocks(self.cones, v - tau * self.c, dual=False)

    def value(self, v):
        if cone_violation(self.cones, v, dual=False) > _feas_tol(v):
            return float("inf")
        return float(self.c @ v)
