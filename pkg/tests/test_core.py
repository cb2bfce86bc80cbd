"""Points, weights, the coupling operator, and the operator-norm estimate."""

import numpy as np
import pytest
import scipy.sparse as sp

import oracles
from gapmin import (
    DimensionError,
    LinearFn,
    LinearPlusNonneg,
    MatrixCoupling,
    PrimalDualPoint,
    SaddleProblem,
    SmoothingPair,
    StepPair,
    apply_M,
    estimate_op_norm,
    weighted_norm_sq,
)
from gapmin.core import DENSE_ENTRY_LIMIT


class TestPrimalDualPoint:
    def test_arithmetic_matches_numpy(self, rng):
        a = PrimalDualPoint(rng.normal(size=4), rng.normal(size=3))
        b = PrimalDualPoint(rng.normal(size=4), rng.normal(size=3))
        np.testing.assert_allclose((a + b).x, a.x + b.x)
        np.testing.assert_allclose((a - b).y, a.y - b.y)
        np.testing.assert_allclose((2.5 * a).x, 2.5 * a.x)
        np.testing.assert_allclose((a * 2.5).y, 2.5 * a.y)
        assert a.dot(b) == pytest.approx(float(a.x @ b.x + a.y @ b.y))
        assert a.norm() == pytest.approx(np.sqrt(a.dot(a)))

    def test_dims(self):
        z = PrimalDualPoint.zeros(4, 3)
        assert (z.n, z.m) == (4, 3)
        assert z.norm() == 0.0

    def test_rejects_nonfinite(self):
        with pytest.raises(ValueError):
            PrimalDualPoint(np.array([1.0, np.nan]), np.zeros(2))
        with pytest.raises(ValueError):
            PrimalDualPoint(np.zeros(2), np.array([np.inf, 0.0]))

    def test_rejects_matrix_blocks(self):
        with pytest.raises(DimensionError):
            PrimalDualPoint(np.zeros((2, 2)), np.zeros(2))


class TestWeightPairs:
    def test_positive_only(self):
        for bad in (0.0, -1.0, np.nan, np.inf):
            with pytest.raises(ValueError):
                SmoothingPair(bad, 1.0)
            with pytest.raises(ValueError):
                StepPair(1.0, bad)

    def test_scaled_and_inverse(self):
        pair = SmoothingPair(2.0, 0.5)
        assert pair.scaled(2.0).weights == (4.0, 1.0)
        assert pair.inverse().weights == (0.5, 2.0)
        assert StepPair(4.0, 0.25).inverse().weights == (0.25, 4.0)

    def test_weighted_norm_sq(self, rng):
        z = PrimalDualPoint(rng.normal(size=3), rng.normal(size=2))
        want = 2.0 * float(z.x @ z.x) + 0.5 * float(z.y @ z.y)
        assert weighted_norm_sq(z, SmoothingPair(2.0, 0.5)) == pytest.approx(want)
        assert weighted_norm_sq(z, (2.0, 0.5)) == pytest.approx(want)
        # plain tuples may carry zero weights, but never negative ones
        assert weighted_norm_sq(z, (0.0, 0.0)) == 0.0
        with pytest.raises(ValueError):
            weighted_norm_sq(z, (-1.0, 1.0))


class TestMatrixCoupling:
    def test_dense_matvecs_match_oracle(self, rng):
        a = rng.normal(size=(5, 7))
        coupling = MatrixCoupling.from_dense(a)
        assert not coupling.is_sparse
        x = rng.normal(size=7)
        y = rng.normal(size=5)
        np.testing.assert_allclose(coupling.apply(x), a @ x, atol=1e-14)
        np.testing.assert_allclose(coupling.apply_adjoint(y), a.T @ y, atol=1e-14)
        np.testing.assert_allclose(coupling.dense(), a)

    def test_large_matrix_goes_sparse(self, rng):
        m, n = 150, 100
        assert m * n > DENSE_ENTRY_LIMIT
        a = rng.normal(size=(m, n))
        coupling = MatrixCoupling.from_dense(a)
        assert coupling.is_sparse
        x = rng.normal(size=n)
        np.testing.assert_allclose(coupling.apply(x), a @ x, atol=1e-12)
        np.testing.assert_allclose(coupling.apply_adjoint(a @ x), a.T @ (a @ x),
                                   atol=1e-12)

    def test_small_sparse_input_densified(self):
        coupling = MatrixCoupling(sp.csr_array(np.eye(3)))
        assert not coupling.is_sparse

    def test_from_triplets_sums_duplicates(self):
        coupling = MatrixCoupling.from_triplets(
            2, 2, rows=[0, 0, 1], cols=[1, 1, 0], vals=[2.0, 3.0, -1.0])
        np.testing.assert_allclose(coupling.dense(),
                                   np.array([[0.0, 5.0], [-1.0, 0.0]]))

    def test_from_triplets_range_checks(self):
        with pytest.raises(DimensionError):
            MatrixCoupling.from_triplets(2, 2, [2], [0], [1.0])
        with pytest.raises(DimensionError):
            MatrixCoupling.from_triplets(2, 2, [0], [-1], [1.0])

    def test_shape_checks(self):
        coupling = MatrixCoupling.from_dense(np.ones((3, 4)))
        with pytest.raises(DimensionError):
            coupling.apply(np.zeros(3))
        with pytest.raises(DimensionError):
            coupling.apply_adjoint(np.zeros(4))
        with pytest.raises(DimensionError):
            MatrixCoupling.from_dense(np.zeros(4))


class TestOperatorNorm:
    def test_matches_svd(self, rng):
        for shape in ((3, 4), (10, 6), (1, 1), (8, 8)):
            a = rng.normal(size=shape)
            est = estimate_op_norm(MatrixCoupling.from_dense(a))
            assert est == pytest.approx(oracles.svd_op_norm(a), rel=1e-6)

    def test_diagonal_exact(self):
        est = estimate_op_norm(MatrixCoupling.from_dense(np.diag([3.0, 1.0])))
        assert est == pytest.approx(3.0, rel=1e-9)

    def test_zero_operator(self):
        assert estimate_op_norm(MatrixCoupling.from_dense(np.zeros((2, 3)))) == 0.0

    def test_cached_property(self, rng):
        coupling = MatrixCoupling.from_dense(rng.normal(size=(4, 4)))
        assert coupling.op_norm is coupling.op_norm


class TestSaddleProblem:
    def test_dim_mismatch(self):
        coupling = MatrixCoupling.from_dense(np.ones((3, 4)))
        with pytest.raises(DimensionError):
            SaddleProblem(f=LinearFn(np.zeros(5)), gstar=LinearFn(np.zeros(3)),
                          coupling=coupling)
        with pytest.raises(DimensionError):
            SaddleProblem(f=LinearFn(np.zeros(4)), gstar=LinearFn(np.zeros(2)),
                          coupling=coupling)

    def test_objective_and_prox(self, rng):
        c = rng.normal(size=4)
        b = rng.normal(size=3)
        problem = SaddleProblem(
            f=LinearPlusNonneg(c), gstar=LinearFn(b),
            coupling=MatrixCoupling.from_dense(rng.normal(size=(3, 4))))
        z = PrimalDualPoint(np.abs(rng.normal(size=4)), rng.normal(size=3))
        assert problem.objective_value(z) == pytest.approx(
            float(c @ z.x + b @ z.y))
        bad = PrimalDualPoint(np.array([-1.0, 1, 1, 1]), z.y)
        assert problem.objective_value(bad) == np.inf

        out = problem.prox(0.5, z)
        np.testing.assert_allclose(out.x, np.maximum(z.x - 0.5 * c, 0.0))
        np.testing.assert_allclose(out.y, z.y - 0.5 * b)
        pair = problem.prox(StepPair(0.5, 2.0), z)
        np.testing.assert_allclose(pair.y, z.y - 2.0 * b)

    def test_apply_M_is_skew(self, toy, rng):
        for _ in range(20):
            z = PrimalDualPoint(rng.normal(size=toy.n), rng.normal(size=toy.m))
            mz = apply_M(toy, z)
            assert abs(mz.dot(z)) <= 1e-12 * max(1.0, z.norm() ** 2)

    def test_apply_M_dim_check(self, toy):
        with pytest.raises(DimensionError):
            apply_M(toy, PrimalDualPoint.zeros(toy.n + 1, toy.m))
