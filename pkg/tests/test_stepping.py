"""Implicit stepper, brute-force oracle, trajectory recording."""

import numpy as np
import pytest

import thermsim as ts
from thermsim.errors import StepFailure
from thermsim.grid import dissipation, integrate
from thermsim.model import legendre_psi_star_of_alpha, nonlocal_coefficient
from thermsim.stepping import brute_force_step, implicit_step, integrate_trajectory


def spec_of(material=None, source=None, m=2.0, kappa=1.0, reg_r=0.0,
            horizon=1.0, initial=None, **kw):
    return ts.ProblemSpec(m=m, kappa=kappa, domain=(1.0,), horizon=horizon,
                          material=material or ts.IdentityLaw(),
                          source=source or ts.ConstantSource(1.0),
                          reg_r=reg_r, initial=initial, **kw)


class TestImplicitStep:
    def test_single_node_closed_form(self):
        # one interior node at x = 1/2: v' = -8 v + 1, backward Euler
        grid = ts.interval(1.0, 2)
        spec = spec_of()
        v1, rep = implicit_step(ts.Field.zeros(grid), spec, ts.StepperConfig(dt=0.1))
        assert v1.values[0] == pytest.approx(0.1 / 1.8, abs=1e-12)
        assert rep.residual <= 1e-10
        assert rep.dt == 0.1

    def test_zero_source_zero_state_fixed_point(self):
        grid = ts.interval(1.0, 6)
        for m in (2.0, 3.0, 4.0):
            spec = spec_of(m=m, kappa=0.0, reg_r=0.01)
            v1, _ = implicit_step(ts.Field.zeros(grid), spec,
                                  ts.StepperConfig(dt=0.05))
            assert np.max(np.abs(v1.values)) == 0.0

    def test_matches_oracle_three_nodes_m4(self):
        grid = ts.interval(1.0, 4)
        law = ts.CubicAffineLaw(linear=1.0, cubic=1.0)
        spec = spec_of(material=law, m=4.0, kappa=2.0, reg_r=0.01,
                       source=ts.gaussian_bump_source(1.0, 2.0, 0.0, 1.5, law))
        rng = np.random.default_rng(3)
        state = ts.Field(grid, rng.uniform(-0.5, 0.5, 3))
        v_fast, _ = implicit_step(state, spec, ts.StepperConfig(dt=0.05))
        v_ref = brute_force_step(state, spec, 0.05)
        assert np.max(np.abs(v_fast.values - v_ref.values)) < 1e-10

    def test_report_residual_invariant(self):
        grid = ts.interval(1.0, 12)
        spec = spec_of(m=3.0, reg_r=1e-3, kappa=4.0)
        rng = np.random.default_rng(5)
        cfg = ts.StepperConfig(dt=0.02)
        state = ts.Field(grid, rng.uniform(-1, 1, 11))
        _, rep = implicit_step(state, spec, cfg)
        assert rep.residual <= cfg.newton_tol
        assert rep.halvings == 0

    def test_forcing_evaluated_at_new_time(self):
        # linear problem: v1 = (I - dt L)^{-1} (v0 + dt (c f + g(t + dt)))
        grid = ts.interval(1.0, 8)
        calls = []

        def forcing(mesh, t):
            calls.append(t)
            return np.full_like(mesh[0], 2.0 * t)

        spec = spec_of(mms_forcing=forcing)
        v0 = ts.Field(grid, np.zeros(7))
        dt = 0.125
        v1, _ = implicit_step(v0, spec, ts.StepperConfig(dt=dt), t=1.0)
        assert all(abs(t - 1.125) < 1e-14 for t in calls)
        h = grid.spacing[0]
        lap = (np.diag(-2.0 * np.ones(7)) + np.diag(np.ones(6), 1)
               + np.diag(np.ones(6), -1)) / h**2
        rhs = v0.values + dt * (1.0 + 2.0 * 1.125)
        expected = np.linalg.solve(np.eye(7) - dt * lap, rhs)
        assert np.max(np.abs(v1.values - expected)) < 1e-9

    def test_step_failure_diagnostics(self):
        grid = ts.interval(1.0, 16)
        law = ts.CubicAffineLaw(linear=1.0, cubic=2.0)
        spec = spec_of(material=law, m=4.0, kappa=50.0, reg_r=1e-4)
        state = ts.Field(grid, 60.0 * np.sin(np.pi * grid.interior_axes()[0]))
        cfg = ts.StepperConfig(dt=0.5, newton_max_iters=1, dt_halving_max=0)
        with pytest.raises(StepFailure) as exc:
            implicit_step(state, spec, cfg)
        assert exc.value.halvings == 0
        assert exc.value.residual is not None


class TestBruteForce:
    def test_single_node_closed_form(self):
        grid = ts.interval(1.0, 2)
        v1 = brute_force_step(ts.Field.zeros(grid), spec_of(), 0.1)
        assert v1.values[0] == pytest.approx(0.1 / 1.8, abs=1e-12)

    def test_zero_kappa_is_linear_solve_m2(self):
        grid = ts.interval(1.0, 6)
        spec = spec_of(kappa=0.0)
        rng = np.random.default_rng(1)
        state = ts.Field(grid, rng.uniform(-1, 1, 5))
        dt = 0.07
        got = brute_force_step(state, spec, dt)
        h = grid.spacing[0]
        lap = (np.diag(-2.0 * np.ones(5)) + np.diag(np.ones(4), 1)
               + np.diag(np.ones(4), -1)) / h**2
        expected = np.linalg.solve(np.eye(5) - dt * lap, state.values)
        assert np.max(np.abs(got.values - expected)) < 1e-11

    def test_node_limit(self):
        grid = ts.interval(1.0, 12)
        with pytest.raises(ValueError):
            brute_force_step(ts.Field.zeros(grid), spec_of(), 0.1)

    def test_lagged_coefficient_error_vanishes_with_dt(self):
        # one Picard sweep vs the self-consistent solve, Richardson in dt
        grid = ts.interval(1.0, 4)
        law = ts.IdentityLaw()
        spec = spec_of(material=law, m=2.0, kappa=3.0,
                       source=ts.gaussian_bump_source(1.0, 3.0, 0.2, 0.4, law))
        state = ts.Field(grid, np.array([0.4, 0.9, 0.3]))
        lag_cfg = lambda dt: ts.StepperConfig(dt=dt, picard_tol=0.9,
                                              picard_max_iters=1)
        diffs = []
        for dt in (0.1, 0.05, 0.025, 0.0125):
            lagged, rep = implicit_step(state, spec, lag_cfg(dt))
            assert rep.picard_iters == 1
            exact = brute_force_step(state, spec, dt)
            diffs.append(np.max(np.abs(lagged.values - exact.values)))
        orders = np.log2(np.array(diffs[:-1]) / np.array(diffs[1:]))
        assert np.all(orders >= 0.9)


class TestTrajectory:
    def test_zero_horizon_records_initial_only(self):
        spec = spec_of(horizon=0.0, initial=ts.BumpInitial(amplitude=1.0))
        grid = ts.interval(1.0, 16)
        rec = integrate_trajectory(spec, grid, ts.StepperConfig(dt=0.01), [0.0])
        assert len(rec.times) == 1
        assert rec.times[0] == 0.0
        assert rec.steps[0] == 0
        assert rec.dalpha_dt_l2[0] == 0.0

    def test_determinism_bit_identical(self):
        spec = spec_of(m=3.0, kappa=5.0, reg_r=1e-3, horizon=0.5,
                       initial=ts.BumpInitial(amplitude=0.5))
        grid = ts.interval(1.0, 24)
        cfg = ts.StepperConfig(dt=0.05)
        times = list(np.linspace(0, 0.5, 6))
        a = integrate_trajectory(spec, grid, cfg, times)
        b = integrate_trajectory(spec, grid, cfg, times)
        assert a.times == b.times
        assert a.linf == b.linf
        assert a.energy_psi_star == b.energy_psi_star
        for sa, sb in zip(a.snapshots, b.snapshots):
            assert np.array_equal(sa.values, sb.values)

    def test_record_times_hit_exactly(self):
        spec = spec_of(horizon=1.0, initial=ts.BumpInitial(amplitude=0.3))
        grid = ts.interval(1.0, 16)
        times = [0.0, 0.111, 0.52, 1.0]
        rec = integrate_trajectory(spec, grid, ts.StepperConfig(dt=0.07), times)
        assert rec.times == times

    def test_default_records_every_step(self):
        spec = spec_of(horizon=0.2, initial=ts.BumpInitial(amplitude=0.3))
        grid = ts.interval(1.0, 8)
        rec = integrate_trajectory(spec, grid, ts.StepperConfig(dt=0.05), None)
        assert rec.times == pytest.approx([0.0, 0.05, 0.1, 0.15, 0.2], abs=1e-12)
        assert rec.steps == [0, 1, 2, 3, 4]

    def test_rejects_out_of_range_record_times(self):
        spec = spec_of(horizon=1.0, initial=ts.BumpInitial())
        grid = ts.interval(1.0, 8)
        with pytest.raises(ValueError):
            integrate_trajectory(spec, grid, ts.StepperConfig(dt=0.1), [0.0, 2.0])

    def test_comparison_principle_constant_source(self):
        # ordered initial data stay ordered (state-independent source)
        law = ts.IdentityLaw()
        spec = spec_of(material=law, m=3.0, kappa=2.0, reg_r=1e-3, horizon=1.0,
                       initial=ts.BumpInitial(amplitude=0.3, width=0.3))
        grid = ts.interval(1.0, 32)
        cfg = ts.StepperConfig(dt=0.05)
        times = list(np.linspace(0, 1.0, 11))
        rec_v = integrate_trajectory(spec, grid, cfg, times)
        from dataclasses import replace
        rec_u = integrate_trajectory(
            replace(spec, initial=ts.BumpInitial(amplitude=0.6, width=0.3)),
            grid, cfg, times)
        worst = max(float(np.max(sv.values - su.values))
                    for sv, su in zip(rec_v.snapshots, rec_u.snapshots))
        assert worst <= 10 * cfg.newton_tol

    def test_dissipation_identity_first_order(self):
        # needs dt below the stiff scale (coeff / h^2) to see the O(dt) gap
        law = ts.CubicAffineLaw(linear=1.0, cubic=0.3)
        spec = spec_of(material=law, m=3.0, kappa=4.0, reg_r=1e-2)
        grid = ts.interval(1.0, 12)
        (x,) = grid.interior_mesh()
        state = ts.Field(grid, 0.8 * np.sin(np.pi * x))

        def identity_residual(dt):
            v1, _ = implicit_step(state, spec, ts.StepperConfig(dt=dt))
            c = nonlocal_coefficient(spec, v1)
            e0 = integrate(legendre_psi_star_of_alpha(law, state.values), grid)
            e1 = integrate(legendre_psi_star_of_alpha(law, v1.values), grid)
            diss = dissipation(v1, spec.m, spec.reg_r)
            src = integrate(c * spec.source.f(v1.values) * v1.values, grid)
            return abs((e1 - e0) / dt + diss - src)

        r1, r2, r4 = (identity_residual(dt) for dt in (4e-4, 2e-4, 1e-4))
        assert np.log2(r1 / r2) > 0.7
        assert np.log2(r2 / r4) > 0.7

    def test_2d_step_matches_oracle(self):
        # exercises the sparse Jacobian path; 3x3 cells = 4 interior nodes
        g = ts.rectangle(1.0, 1.2, 3, 3)
        law = ts.CubicAffineLaw(linear=1.0, cubic=0.5)
        spec = ts.ProblemSpec(m=3.0, kappa=2.0, domain=(1.0, 1.2), horizon=1.0,
                              material=law,
                              source=ts.gaussian_bump_source(1.0, 1.0, 0.1, 1.0, law),
                              reg_r=0.01)
        rng = np.random.default_rng(0)
        state = ts.Field(g, rng.uniform(-0.5, 0.5, (2, 2)))
        fast, _ = implicit_step(state, spec, ts.StepperConfig(dt=0.05))
        ref = brute_force_step(state, spec, 0.05)
        assert np.max(np.abs(fast.values - ref.values)) < 1e-10

    def test_2d_trajectory_decays(self):
        spec = ts.ProblemSpec(m=2.0, kappa=1.0, domain=(1.0, 1.0), horizon=0.3,
                              material=ts.IdentityLaw(),
                              source=ts.ConstantSource(1.0),
                              initial=ts.BumpInitial(amplitude=1.0))
        grid = ts.rectangle(1.0, 1.0, 12, 12)
        rec = integrate_trajectory(spec, grid, ts.StepperConfig(dt=0.05),
                                   [0.0, 0.15, 0.3])
        assert rec.linf[0] == 1.0
        assert rec.linf[1] < 0.2          # strong diffusive decay of the bump
        assert all(np.isfinite(rec.l2))

    def test_record_validation_rejects_bad_times(self):
        from thermsim.stepping import TrajectoryRecord
        rec = TrajectoryRecord(run_id=0, m=2.0, reg_r=0.0,
                               times=[0.0, 1.0, 1.0], steps=[0, 1, 2],
                               linf=[0.0] * 3, l1=[0.0] * 3, l2=[0.0] * 3,
                               lp_max=[0.0] * 3, w1m_seminorm=[0.0] * 3,
                               energy_psi_star=[0.0] * 3,
                               dalpha_dt_l2=[0.0] * 3,
                               nonlocal_coeff=[1.0] * 3,
                               newton_iters=[0] * 3, picard_iters=[0] * 3)
        with pytest.raises(ValueError):
            rec.validate()

    def test_sup_norm_stable_across_regularization(self):
        base = spec_of(m=4.0, kappa=30.0, horizon=2.0,
                       initial=ts.BumpInitial(amplitude=0.05, width=0.25))
        grid = ts.interval(1.0, 32)
        cfg = ts.StepperConfig(dt=0.05, newton_max_iters=200)
        times = list(np.linspace(0, 2.0, 21))
        sups = []
        for r in (1e-1, 1e-3):
            rec = integrate_trajectory(ts.regularize(base, r), grid, cfg, times)
            sups.append(max(rec.linf))
        assert abs(sups[1] - sups[0]) / sups[0] < 0.05
