import numpy as np
import pytest

from delaycrane.model import (CraneParams, InitialData, Regime,
                              TensionProfile, Variant)
from delaycrane.solver import (CraneState, Grid, SimConfig, discretize,
                               mode_initial_data, mode_solution, rhs,
                               simulate, step, time_step)
from delaycrane.spectral import instability_witness_beta0

GENERAL = Regime(Variant.GENERAL)
UNIT_TENSION = TensionProfile.constant(1.0)


def t2_params():
    return CraneParams(m=1.0, M=1.0, alpha=0.5, beta=1.5, sigma=1.0,
                       tau=0.5, K=1.0)


class TestGrid:
    def test_geometry(self):
        g = Grid(4)
        assert g.dx == 0.25
        np.testing.assert_allclose(g.nodes, [0.0, 0.25, 0.5, 0.75, 1.0])

    def test_too_coarse(self):
        with pytest.raises(ValueError):
            Grid(2)


class TestDiscretize:
    def test_history_sampling(self):
        # f(s) = 2 s / tau, so u(x) = f(-tau x) = -2 x on the nodes
        tau = 0.7
        init = InitialData.from_values(history=lambda s: 2.0 * s / tau)
        state = discretize(init, UNIT_TENSION, Grid(4), tau=tau)
        np.testing.assert_allclose(state.u, [0.0, -0.5, -1.0, -1.5, -2.0])

    def test_boundary_velocities_from_y1(self):
        init = InitialData.from_values(y1=lambda x: 1.0 + x)
        state = discretize(init, UNIT_TENSION, Grid(10), tau=1.0)
        assert state.xi == 1.0
        assert state.eta == 2.0

    def test_needs_delay(self):
        with pytest.raises(ValueError):
            discretize(InitialData.zero(), UNIT_TENSION, Grid(4))


class TestTimeStep:
    def test_cfl_bound(self):
        params = t2_params()
        config = SimConfig(grid=Grid(100), regime=GENERAL, cfl=0.5)
        dt = time_step(config, params, UNIT_TENSION)
        # transport limit: tau * dx = 0.005 beats dx / sqrt(a) = 0.01
        assert dt == pytest.approx(0.5 * 0.5 * 0.01)

    def test_wave_limited_for_slow_transport(self):
        params = CraneParams(m=1, M=1, alpha=0.5, beta=1.5, sigma=1,
                             tau=5.0, K=1)
        config = SimConfig(grid=Grid(100), regime=GENERAL, cfl=1.0)
        dt = time_step(config, params, TensionProfile.constant(4.0))
        assert dt == pytest.approx(0.01 / 2.0)


class TestStationarity:
    def test_rhs_vanishes_on_constant_state(self):
        init = InitialData.from_values(y0=3.0)
        state = discretize(init, UNIT_TENSION, Grid(20), tau=0.5)
        d = rhs(state, t2_params(), UNIT_TENSION, GENERAL)
        assert np.all(d.y == 0.0)
        assert np.all(d.z == 0.0)
        assert np.all(d.u == 0.0)

    def test_step_keeps_constant_state_bitwise(self):
        init = InitialData.from_values(y0=3.0)
        state = discretize(init, UNIT_TENSION, Grid(20), tau=0.5)
        after = step(state, t2_params(), UNIT_TENSION, GENERAL, dt=0.001)
        np.testing.assert_array_equal(after.y, state.y)
        np.testing.assert_array_equal(after.z, state.z)
        np.testing.assert_array_equal(after.u, state.u)


class TestSimulate:
    def test_rejects_violated_hypotheses(self):
        params = t2_params()
        bad = CraneParams(m=params.m, M=params.M, alpha=5.0, beta=params.beta,
                          sigma=params.sigma, tau=params.tau, K=params.K)
        config = SimConfig(grid=Grid(20), regime=GENERAL, t_final=0.1)
        with pytest.raises(ValueError, match="hypotheses"):
            simulate(InitialData.zero(), bad, UNIT_TENSION, config)

    def test_force_runs_anyway_and_records_event(self):
        params = t2_params()
        bad = CraneParams(m=params.m, M=params.M, alpha=5.0, beta=params.beta,
                          sigma=params.sigma, tau=params.tau, K=params.K)
        config = SimConfig(grid=Grid(20), regime=GENERAL, t_final=0.1,
                           force=True)
        result = simulate(InitialData.zero(), bad, UNIT_TENSION, config)
        assert any(e.kind == "hypothesis-violation" for e in result.events)

    def test_delay_channel_transports_boundary_velocity(self):
        # after the delay has elapsed, u(1, t) must equal xi(t - tau)
        params = t2_params()
        init = InitialData.from_values(y0=lambda x: np.sin(np.pi * x))
        grid = Grid(200)
        config = SimConfig(grid=grid, regime=GENERAL, t_final=2.0,
                           sample_every=1)
        state = discretize(init, UNIT_TENSION, grid, params=params)
        dt = time_step(config, params, UNIT_TENSION)
        times, xis = [state.t], [state.xi]
        while state.t < config.t_final - 1e-12:
            state = step(state, params, UNIT_TENSION, GENERAL, dt)
            times.append(state.t)
            xis.append(state.xi)
        xi_at = lambda t: np.interp(t, times, xis)
        assert abs(state.u[-1] - xi_at(state.t - params.tau)) < 2e-3
        # and along the channel: u(x, t) = xi(t - tau x)
        mid = len(state.u) // 2
        assert abs(state.u[mid] - xi_at(state.t - 0.5 * params.tau)) < 2e-3

    def test_blowup_event_on_divergent_run(self):
        params, _ = instability_witness_beta0(sigma=1.0, m=1.0)
        regime = Regime(Variant.BETA0, convergent=False)
        init = mode_initial_data(params.sigma, params, regime)
        config = SimConfig(grid=Grid(50), regime=regime, t_final=20.0,
                           blowup_threshold=100.0)
        result = simulate(init, params, UNIT_TENSION, config)
        kinds = [e.kind for e in result.events]
        assert "blowup" in kinds
        assert result.final_state.is_finite(threshold=np.inf)
        assert result.final_state.t < config.t_final

    def test_converged_event_and_sampling(self):
        params = t2_params()
        init = InitialData.from_values(y0=lambda x: np.sin(np.pi * x))
        config = SimConfig(grid=Grid(50), regime=GENERAL, t_final=30.0)
        result = simulate(init, params, UNIT_TENSION, config)
        assert any(e.kind == "converged" for e in result.events)
        assert result.samples[0].t == 0.0
        assert result.samples[-1].t == pytest.approx(30.0)
        assert result.zeta is not None


class TestModes:
    def test_witness_mode_satisfies_boundary_condition(self):
        params, _ = instability_witness_beta0(sigma=1.0, m=1.0)
        regime = Regime(Variant.BETA0, convergent=False)
        f, residual = mode_solution(params.sigma, params, regime)
        assert abs(residual) < 1e-12
        assert np.max(np.abs(f)) > 0.0

    def test_generic_lambda_fails_boundary_condition(self):
        params = t2_params()
        _, residual = mode_solution(0.37 + 0.21j, params, GENERAL)
        assert abs(residual) > 1e-3

    def test_mode_initial_data_is_compatible(self):
        # history must join the velocity at the platform: f(0-) = y1(0)
        params = t2_params()
        init = mode_initial_data(-0.2 + 1.1j, params, GENERAL)
        h0 = float(init.history(np.array(0.0)))
        y10 = float(init.y1(np.array(0.0)))
        assert h0 == pytest.approx(y10, abs=1e-14)

    def test_xi_eta_track_z(self):
        state = CraneState(t=0.0, y=np.zeros(5),
                           z=np.array([1.0, 0, 0, 0, -2.0]), u=np.zeros(5))
        assert state.xi == 1.0
        assert state.eta == -2.0
