"""Runner behavior: schedules, records, stopping, restarts, and the
contraction diagnostics that back the continuation and momentum methods."""

import math

import numpy as np
import pytest

import oracles
from instances import toy_lp_dense
from gapmin import (
    AcceleratedParams,
    ParameterError,
    PrimalDualPoint,
    ProxGradParams,
    RestartParams,
    SmoothingPair,
    gap,
    gap_value,
    run_accelerated,
    run_prox_grad,
    run_restarted,
    weighted_norm_sq,
)
from gapmin.algorithms import (
    _accelerated_step,
    accelerated_schedule,
    prox_grad_schedule,
    start_point,
)
from gapmin.smoothed_gap import lipschitz_constant


class TestParamsValidation:
    def test_prox_grad(self):
        with pytest.raises(ParameterError):
            ProxGradParams(p_prime=0.0)
        with pytest.raises(ParameterError):
            ProxGradParams(p_prime=1.0)
        with pytest.raises(ParameterError):
            ProxGradParams(b=0.0)
        with pytest.raises(ParameterError):
            ProxGradParams(beta0=-1.0)
        with pytest.raises(ParameterError):
            ProxGradParams(max_iters=-1)
        with pytest.raises(ParameterError):
            ProxGradParams(tol=-1e-9)

    def test_accelerated(self):
        with pytest.raises(ParameterError):
            AcceleratedParams(t=1.5)
        with pytest.raises(ParameterError):
            AcceleratedParams(t=3.0, b=2.0)
        with pytest.raises(ParameterError):
            AcceleratedParams(beta_x0=1.0)  # must come with beta_y0
        with pytest.raises(ParameterError):
            AcceleratedParams(beta_x0=1.0, beta_y0=0.0)

    def test_restart_factor_range(self):
        with pytest.raises(ParameterError):
            RestartParams(restart_factor=0.0)
        with pytest.raises(ParameterError):
            RestartParams(restart_factor=1.0)
        RestartParams(restart_factor=0.99)

    def test_admissibility(self, toy):
        op = toy.op_norm
        bad = AcceleratedParams(beta_x0=op, beta_y0=op)  # cbar = 8
        assert bad.cbar(op) == pytest.approx(8.0)
        with pytest.raises(ParameterError):
            run_accelerated(toy, params=bad)

    def test_stride_check(self, toy):
        with pytest.raises(ParameterError):
            run_prox_grad(toy, stride=0)


class TestSchedules:
    def test_prox_grad_formulas(self):
        params = ProxGradParams()
        op = 1.0
        for k in (0, 1, 7, 100):
            beta, gamma = prox_grad_schedule(k, params, op)
            assert beta.beta_x == beta.beta_y
            want = op * math.sqrt(params.p_prime / (params.b + params.p_prime))
            want /= math.sqrt(k + params.b)
            assert beta.beta_x == pytest.approx(want, rel=1e-15)
            assert gamma.gamma_x == pytest.approx(
                beta.beta_x / (op ** 2 + 2 * beta.beta_x ** 2), rel=1e-15)

    def test_prox_grad_default_level(self):
        beta, _ = prox_grad_schedule(0, ProxGradParams(), 1.0)
        assert beta.beta_x == pytest.approx(0.04997, abs=1e-5)

    def test_step_is_inverse_lipschitz(self):
        """gamma_k = 1 / L at unit step weights, the longest safe step."""
        from gapmin import StepPair
        params = ProxGradParams()
        for op in (0.5, 1.0, 3.0):
            for k in (0, 5, 50):
                beta, gamma = prox_grad_schedule(k, params, op)
                lips = lipschitz_constant(beta, StepPair(1.0, 1.0), op)
                assert gamma.gamma_x == pytest.approx(1.0 / lips, rel=1e-12)

    def test_beta0_override(self):
        beta, _ = prox_grad_schedule(0, ProxGradParams(beta0=2.0, b=4.0), 10.0)
        assert beta.beta_x == pytest.approx(1.0)  # 2 / sqrt(0 + 4)

    def test_accelerated_formulas(self):
        params = AcceleratedParams()
        op = 2.0
        bx0, by0 = params.resolve_beta0(op)
        assert (bx0, by0) == (0.5, 0.5)
        for k in (0, 3, 42):
            theta, beta, gamma = accelerated_schedule(k, params, op)
            assert theta == pytest.approx(params.t / (k + params.t))
            shrink = params.b / (k + params.b)
            assert beta.beta_x == pytest.approx(bx0 * shrink)
            denom = 2 * beta.beta_x * beta.beta_y + op ** 2
            assert gamma.gamma_x == pytest.approx(beta.beta_y / denom)
            assert gamma.gamma_y == pytest.approx(beta.beta_x / denom)

    def test_negative_index_rejected(self):
        with pytest.raises(ParameterError):
            prox_grad_schedule(-1, ProxGradParams(), 1.0)
        with pytest.raises(ParameterError):
            accelerated_schedule(-1, AcceleratedParams(), 1.0)

    def test_zero_op_norm_rejected(self):
        with pytest.raises(ParameterError):
            prox_grad_schedule(0, ProxGradParams(), 0.0)


class TestStartPoint:
    def test_origin_default(self, toy):
        z = start_point(toy, None)
        assert z.norm() == 0.0

    def test_identity_on_feasible(self, toy):
        z0 = PrimalDualPoint(np.ones(toy.n), np.zeros(toy.m))
        assert (start_point(toy, z0) - z0).norm() == 0.0

    def test_pulls_into_domain(self, toy):
        z0 = PrimalDualPoint(-np.ones(toy.n), np.zeros(toy.m))
        assert toy.objective_value(z0) == np.inf
        z = start_point(toy, z0)
        assert np.isfinite(toy.objective_value(z))


class TestRecords:
    def test_first_and_final_rows(self, toy):
        res = run_prox_grad(toy, params=ProxGradParams(max_iters=10))
        assert res.records[0].iter == 0
        assert res.records[0].step_norm == 0.0
        assert res.records[-1].iter == res.iterations == 10
        assert [r.iter for r in res.records] == list(range(11))

    def test_stride_keeps_final(self, toy):
        res = run_prox_grad(toy, params=ProxGradParams(max_iters=7), stride=3)
        assert [r.iter for r in res.records] == [0, 3, 6, 7]

    def test_zero_budget(self, toy):
        res = run_prox_grad(toy, params=ProxGradParams(max_iters=0))
        assert res.iterations == 0
        assert len(res.records) == 1
        assert not res.converged

    def test_infinite_tol_converges_immediately(self, toy):
        res = run_prox_grad(toy, params=ProxGradParams(max_iters=10,
                                                       tol=float("inf")))
        assert res.converged
        assert res.iterations == 0

    def test_observer_stop(self, toy):
        seen = []

        def observer(rec):
            seen.append(rec.iter)
            return rec.iter >= 5

        res = run_prox_grad(toy, params=ProxGradParams(max_iters=100),
                            observer=observer)
        assert res.iterations == 5
        assert seen == list(range(6))
        assert not res.converged

    def test_report_beta_column(self, toy):
        rb = SmoothingPair(0.1, 0.1)
        res = run_prox_grad(toy, params=ProxGradParams(max_iters=3),
                            report_beta=rb)
        for rec in res.records:
            assert rec.gap_report is not None
        res2 = run_prox_grad(toy, params=ProxGradParams(max_iters=3))
        assert all(r.gap_report is None for r in res2.records)

    def test_infeasible_start_recorded_finite(self, toy):
        z0 = PrimalDualPoint(-np.ones(toy.n), np.zeros(toy.m))
        res = run_prox_grad(toy, z0=z0, params=ProxGradParams(max_iters=2))
        assert np.isfinite(res.records[0].gap_beta0)


class TestProxGradDescent:
    def test_gap_decreases_overall(self, toy):
        res = run_prox_grad(toy, params=ProxGradParams(max_iters=300))
        first = res.records[0].gap_beta0
        last = res.records[-1].gap_beta0
        assert last < 1e-3 * first

    def test_fixed_beta_descent_inequality(self, toy):
        """One continuation level: each step decreases G_beta by at least
        the proximal-gradient amount ||z+ - z||^2 / (2 gamma)."""
        op = toy.op_norm
        level = 0.05 * op
        beta = SmoothingPair(level, level)
        gamma = level / (op ** 2 + 2.0 * level ** 2)
        z = start_point(toy, None)
        g = gap_value(toy, beta, z)
        for _ in range(100):
            ev = gap(toy, beta, z)
            znew = toy.prox(gamma, PrimalDualPoint(z.x - gamma * ev.grad.x,
                                                   z.y - gamma * ev.grad.y))
            gnew = gap_value(toy, beta, znew)
            drop = (znew - z).norm() ** 2 / (2.0 * gamma)
            assert gnew <= g - drop + 1e-8
            z, g = znew, gnew


class TestAccelerated:
    def test_converges_faster_than_plain(self, toy):
        pg = run_prox_grad(toy, params=ProxGradParams(max_iters=200))
        apg = run_accelerated(toy, params=AcceleratedParams(max_iters=200))
        assert apg.records[-1].gap_beta0 < pg.records[-1].gap_beta0

    def test_lyapunov_contraction(self, toy):
        """The momentum method's weighted energy contracts at the schedule
        rate rho_k = ((k+b-1)/(k+b)) * ((k+c+cbar)/(k+c)) along the run."""
        op = toy.op_norm
        params = AcceleratedParams()
        t, b = params.t, params.b
        cbar = params.cbar(op)
        c = min(2 * b + 1 - 2 * t - cbar, ((b - 1) ** 2 - (t - 3) * cbar) / t)
        assert (cbar, c) == (0.5, 4.5)

        a, bvec, cvec = toy_lp_dense()
        zstar = PrimalDualPoint(oracles.enumerate_polytope_vertices(a, bvec)[0],
                                oracles.lp_basic_duals(a, cvec)[0])

        K = 60
        z = zb = start_point(toy, None)
        traj = [(z, zb)]
        for k in range(K + 2):
            theta, beta, gamma = accelerated_schedule(k, params, op)
            z, zb = _accelerated_step(toy, z, zb, theta, beta, gamma)
            traj.append((z, zb))

        def energy(k):
            th1, be1, ga1 = accelerated_schedule(k - 1, params, op)
            _, bek, _ = accelerated_schedule(k, params, op)
            if k >= 2:
                ratio = be1.beta_x / accelerated_schedule(k - 2, params, op)[1].beta_x
            else:
                ratio = (b - 1.0) / b
            zk, zbk = traj[k]
            w = (th1 ** 2 / ga1.gamma_x - be1.beta_x * th1,
                 th1 ** 2 / ga1.gamma_y - be1.beta_y * th1)
            return (ratio * gap_value(toy, bek, zk)
                    + 0.5 * weighted_norm_sq(zk - zstar, be1.weights)
                    + 0.5 * weighted_norm_sq(zbk - zstar, w))

        for k in range(1, K):
            rho = ((k + b - 1.0) / (k + b)) * ((k + c + cbar) / (k + c))
            assert energy(k + 1) <= rho * energy(k) + 1e-7 * abs(energy(k))


class TestRestarted:
    def test_restart_rows_mark_level_reset(self, toy):
        res = run_restarted(toy, params=RestartParams(
            inner=AcceleratedParams(max_iters=200)))
        marked = [r for r in res.records if r.restarted]
        assert marked, "expected at least one restart within 200 iterations"
        for rec in marked:
            # the schedule index resets to 0, so the current level is beta_0
            assert rec.gap_betak == rec.gap_beta0

    def test_restart_gaps_decrease_geometrically(self, toy):
        factor = 0.5
        res = run_restarted(toy, params=RestartParams(
            inner=AcceleratedParams(max_iters=200), restart_factor=factor))
        g0 = res.records[0].gap_beta0
        for s, rec in enumerate((r for r in res.records if r.restarted), start=1):
            assert rec.gap_beta0 <= factor ** s * g0 * (1 + 1e-12)

    def test_epochs_nondecreasing(self, toy):
        res = run_restarted(toy, params=RestartParams(
            inner=AcceleratedParams(max_iters=200)))
        epochs = [r.epoch for r in res.records]
        assert epochs == sorted(epochs)
        assert epochs[-1] >= 1

    def test_converges_to_tight_tolerance(self, toy):
        res = run_restarted(toy, params=RestartParams(
            inner=AcceleratedParams(max_iters=50_000, tol=1e-9)))
        assert res.converged
        assert res.iterations < 500
        assert res.records[-1].gap_beta0 <= 1e-9

    def test_custom_restart_factor(self, toy):
        eager = run_restarted(toy, params=RestartParams(
            inner=AcceleratedParams(max_iters=100), restart_factor=0.9))
        lazy = run_restarted(toy, params=RestartParams(
            inner=AcceleratedParams(max_iters=100), restart_factor=0.1))
        n_eager = sum(r.restarted for r in eager.records)
        n_lazy = sum(r.restarted for r in lazy.records)
        assert n_eager > n_lazy
