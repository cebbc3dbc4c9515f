import numpy as np
import pytest

import wonham_lab as wl
from wonham_lab.ctmc import EPS_FLOOR, CtmcPath, TimeGrid
from wonham_lab.errors import DimensionMismatch, GridExceedsPath, NonFiniteState
from wonham_lab.filtering import integrate_spec_batch, integrate_wonham_batch

from conftest import random_interior, random_rate_matrix


def constant_path(state, horizon, n_states=2):
    return CtmcPath(
        jump_times=np.array([]), states=np.array([state]), horizon=horizon
    )


class TestSimulateObservations:
    def test_noiseless_constant_path(self):
        grid = TimeGrid(dt=0.1, n_steps=10)
        h = wl.SensorVector(np.array([2.5, -1.0]))
        obs = wl.simulate_observations(
            constant_path(0, 1.0), h, 0.0, grid, np.random.default_rng(0)
        )
        assert np.allclose(obs.dY, 2.5 * 0.1, atol=1e-15)

    def test_noise_variance(self):
        grid = TimeGrid(dt=1e-3, n_steps=100_000)
        h = wl.SensorVector(np.zeros(2))
        obs = wl.simulate_observations(
            constant_path(0, grid.end), h, 1.0, grid, np.random.default_rng(1)
        )
        assert obs.dY.var() == pytest.approx(grid.dt, rel=0.05)

    def test_mid_cell_jump_integral(self):
        # one jump at fraction alpha of the single cell, no noise
        alpha = 0.3
        path = CtmcPath(
            jump_times=np.array([alpha * 0.5]),
            states=np.array([0, 1]),
            horizon=0.5,
        )
        h = wl.SensorVector(np.array([2.0, -4.0]))
        grid = TimeGrid(dt=0.5, n_steps=1)
        obs = wl.simulate_observations(path, h, 0.0, grid, np.random.default_rng(0))
        expected = (alpha * 2.0 + (1 - alpha) * (-4.0)) * 0.5
        assert obs.dY[0] == pytest.approx(expected, abs=1e-15)

    def test_grid_exceeding_path_rejected(self):
        grid = TimeGrid(dt=0.5, n_steps=4)
        with pytest.raises(GridExceedsPath):
            wl.simulate_observations(
                constant_path(0, 1.0),
                wl.SensorVector(np.zeros(2)),
                1.0,
                grid,
                np.random.default_rng(0),
            )

    def test_deterministic_given_seed(self, q2):
        grid = TimeGrid(dt=1e-2, n_steps=50)
        h = wl.SensorVector(np.array([-1.0, 1.0]))
        path = wl.sample_ctmc_path(
            q2, wl.SimplexVector(np.array([0.5, 0.5])), 1.0, np.random.default_rng(3)
        )
        a = wl.simulate_observations(path, h, 1.0, grid, np.random.default_rng(4))
        b = wl.simulate_observations(path, h, 1.0, grid, np.random.default_rng(4))
        assert np.array_equal(a.dY, b.dY)
        assert a.checksum() == b.checksum()


class TestIntegrateWonham:
    @pytest.mark.parametrize("scheme", ["zakai", "ks"])
    def test_uninformative_sensor_reduces_to_forward_equation(self, q2, scheme):
        # constant sensor carries no information; the filter solves the
        # forward equation, here known in closed form
        grid = TimeGrid(dt=1e-3, n_steps=1000)
        h = wl.SensorVector(np.array([3.0, 3.0]))
        path = constant_path(0, 1.0)
        obs = wl.simulate_observations(path, h, 1.0, grid, np.random.default_rng(5))
        traj = wl.integrate_wonham(
            q2, h, 1.0, obs, wl.SimplexVector(np.array([1.0, 0.0])), scheme=scheme
        )
        analytic = 0.5 * (1.0 + np.exp(-2.0 * 1.0))
        assert traj.values[-1, 0] == pytest.approx(analytic, abs=10 * grid.dt)

    def test_single_state_constant(self):
        q = wl.validate_rate_matrix([[0.0]])
        grid = TimeGrid(dt=0.1, n_steps=5)
        obs = wl.simulate_observations(
            constant_path(0, 1.0), wl.SensorVector(np.array([1.0])), 1.0, grid,
            np.random.default_rng(0),
        )
        traj = wl.integrate_wonham(
            q, wl.SensorVector(np.array([1.0])), 1.0, obs, wl.SimplexVector(np.array([1.0]))
        )
        assert np.all(traj.values == 1.0)

    def test_stationary_with_constant_sensor_is_fixed_point(self, q3):
        pi = wl.stationary_distribution(q3)
        grid = TimeGrid(dt=1e-3, n_steps=200)
        h = wl.SensorVector(np.full(3, 2.0))
        path = wl.sample_ctmc_path(q3, pi, grid.end, np.random.default_rng(6))
        obs = wl.simulate_observations(path, h, 1.0, grid, np.random.default_rng(7))
        traj = wl.integrate_wonham(q3, h, 1.0, obs, pi)
        assert np.abs(traj.values - np.asarray(pi)[None, :]).max() <= 1e-9

    def test_constant_sensor_is_noise_seed_independent(self, q3):
        # zero gain in the normalized scheme: different noise, same output
        grid = TimeGrid(dt=1e-3, n_steps=500)
        h = wl.SensorVector(np.full(3, 1.5))
        init = wl.SimplexVector(np.array([0.6, 0.3, 0.1]))
        path = constant_path(0, grid.end, 3)
        out = []
        for seed in (1, 2):
            obs = wl.simulate_observations(path, h, 1.0, grid, np.random.default_rng(seed))
            out.append(wl.integrate_wonham(q3, h, 1.0, obs, init, scheme="ks").values)
        # projection effects admit up to EPS_FLOOR * n_states of slack
        assert np.abs(out[0] - out[1]).max() <= EPS_FLOOR * 3

    def test_trajectory_stays_on_interior_simplex(self, rng):
        q = random_rate_matrix(rng, 4)
        h = wl.SensorVector(rng.uniform(-5, 5, 4))
        init = random_interior(rng, 4)
        grid = TimeGrid(dt=1e-3, n_steps=2000)
        path = wl.sample_ctmc_path(q, init, grid.end, rng)
        obs = wl.simulate_observations(path, h, 1.0, grid, rng)
        for scheme in ("zakai", "ks"):
            traj = wl.integrate_wonham(q, h, 1.0, obs, init, scheme=scheme)
            assert np.abs(traj.values.sum(axis=1) - 1.0).max() <= 1e-10
            assert traj.values.min() >= EPS_FLOOR

    def test_nonfinite_step_reported(self, q2):
        # an increment large enough to overflow the unnormalized mass
        grid = TimeGrid(dt=1.0, n_steps=2)
        h = wl.SensorVector(np.array([-500.0, 500.0]))
        obs = wl.ObservationIncrements(grid=grid, dY=np.array([1e306, 1e306]), sigma=1.0)
        with np.errstate(over="ignore"), pytest.raises(NonFiniteState):
            wl.integrate_wonham(q2, h, 1.0, obs, wl.SimplexVector(np.array([0.5, 0.5])))

    def test_dimension_mismatch(self, q3):
        grid = TimeGrid(dt=0.1, n_steps=2)
        obs = wl.simulate_observations(
            constant_path(0, 1.0), wl.SensorVector(np.zeros(2)), 1.0, grid,
            np.random.default_rng(0),
        )
        with pytest.raises(DimensionMismatch):
            wl.integrate_wonham(
                q3, wl.SensorVector(np.zeros(2)), 1.0, obs,
                wl.SimplexVector(np.array([0.5, 0.5])),
            )


class TestIntegrateGeneric:
    def test_zero_spec_constant_trajectory(self, q2):
        spec = wl.ApproximateFilterSpec(
            drift=lambda t, p: np.zeros_like(p),
            gain=lambda t, p: np.zeros_like(p),
            label="frozen",
        )
        grid = TimeGrid(dt=1e-2, n_steps=100)
        obs = wl.simulate_observations(
            constant_path(0, 1.0), wl.SensorVector(np.array([-1.0, 1.0])), 1.0, grid,
            np.random.default_rng(9),
        )
        init = wl.SimplexVector(np.array([0.3, 0.7]))
        traj = wl.integrate_generic(spec, obs, init)
        assert np.abs(traj.values - np.asarray(init)[None, :]).max() <= 1e-15

    def test_exact_spec_matches_direct_scheme(self, q2):
        h = wl.SensorVector(np.array([-1.0, 1.0]))
        grid = TimeGrid(dt=1e-3, n_steps=1000)
        rng = np.random.default_rng(10)
        path = wl.sample_ctmc_path(q2, wl.SimplexVector(np.array([0.5, 0.5])), 1.0, rng)
        obs = wl.simulate_observations(path, h, 1.0, grid, rng)
        init = wl.SimplexVector(np.array([0.5, 0.5]))
        a = wl.integrate_generic(wl.exact_wonham_spec(q2, h), obs, init)
        b = wl.integrate_wonham(q2, h, 1.0, obs, init, scheme="ks")
        assert np.abs(a.values - b.values).max() <= 10 * grid.dt
        c = wl.integrate_wonham(q2, h, 1.0, obs, init, scheme="zakai")
        assert np.abs(a.values - c.values).max() <= 10 * grid.dt

    def test_identity_misspecification_is_exact_spec(self, q3):
        h = wl.SensorVector(np.array([-1.0, 0.0, 1.0]))
        grid = TimeGrid(dt=1e-3, n_steps=500)
        rng = np.random.default_rng(11)
        init = wl.SimplexVector(np.array([0.3, 0.3, 0.4]))
        path = wl.sample_ctmc_path(q3, init, grid.end, rng)
        obs = wl.simulate_observations(path, h, 1.0, grid, rng)
        a = wl.integrate_generic(wl.misspecified_wonham_spec(q3, h), obs, init)
        b = wl.integrate_generic(wl.exact_wonham_spec(q3, h), obs, init)
        assert np.array_equal(a.values, b.values)

    def test_projection_diagnostics_recorded(self, q3, rng):
        h = wl.SensorVector(np.array([-1.0, 0.0, 1.0]))
        grid = TimeGrid(dt=1e-3, n_steps=200)
        init = random_interior(rng, 3)
        path = wl.sample_ctmc_path(q3, init, grid.end, rng)
        obs = wl.simulate_observations(path, h, 1.0, grid, rng)
        traj = wl.integrate_generic(wl.exact_wonham_spec(q3, h), obs, init)
        assert traj.projection_l1 is not None
        assert traj.projection_l1.shape == (grid.n_steps,)
        assert np.all(traj.projection_l1 >= 0.0)
        assert traj.floor_activations >= 0

    def test_six_state_misspecified_trajectory_invariants(self):
        from wonham_lab.experiments import MODEL_FIXTURES

        fx = MODEL_FIXTURES["six_state"]
        q = wl.validate_rate_matrix(fx["q"])
        h = wl.SensorVector(np.asarray(fx["h"], dtype=float))
        mu = wl.SimplexVector(np.asarray(fx["mu"], dtype=float))
        nu = wl.SimplexVector(np.asarray(fx["nu"], dtype=float))
        grid = TimeGrid(dt=1e-3, n_steps=2000)
        rng = np.random.default_rng(55)
        path = wl.sample_ctmc_path(q, mu, grid.end, rng)
        obs = wl.simulate_observations(path, h, 1.0, grid, rng)
        spec = wl.misspecified_wonham_spec(wl.qtilde_fixture("six_state"), h)
        traj = wl.integrate_generic(spec, obs, nu)
        assert np.abs(traj.values.sum(axis=1) - 1.0).max() <= 1e-10
        assert traj.values.min() >= EPS_FLOOR

    def test_same_observations_contract(self, q2):
        # two inits, same increments: the error at the horizon sits below
        # its initial value on every path
        h = wl.SensorVector(np.array([-1.0, 1.0]))
        grid = TimeGrid(dt=1e-3, n_steps=5000)
        mu = wl.SimplexVector(np.array([0.5, 0.5]))
        nu = wl.SimplexVector(np.array([0.4, 0.6]))
        h0 = wl.hilbert_distance(mu, nu)
        for seed in range(5):
            rng = np.random.default_rng([21, seed])
            path = wl.sample_ctmc_path(q2, mu, grid.end, rng)
            obs = wl.simulate_observations(path, h, 1.0, grid, rng)
            a = wl.integrate_wonham(q2, h, 1.0, obs, mu)
            b = wl.integrate_wonham(q2, h, 1.0, obs, nu)
            assert wl.hilbert_error_series(a, b)[-1] < h0


class TestMisspecifiedSpec:
    def test_gain_vanishes_at_vertex(self, q3):
        h = wl.SensorVector(np.array([-1.0, 0.0, 1.0]))
        spec = wl.misspecified_wonham_spec(q3, h)
        e1 = np.array([0.0, 1.0, 0.0])
        assert np.abs(spec.gain(0.0, e1)).max() == 0.0

    def test_centered_sensor_drift_is_pure_mixing(self):
        qtilde = wl.qtilde_fixture("three_state")
        h = wl.SensorVector(np.array([-1.0, 0.0, 1.0]))
        spec = wl.misspecified_wonham_spec(qtilde, h)
        p = np.ones(3) / 3
        assert p @ np.asarray(h) == 0.0
        assert np.allclose(spec.drift(0.0, p), np.asarray(qtilde).T @ p, atol=1e-15)

    def test_same_sensor_same_gain_as_exact(self, q3):
        h = wl.SensorVector(np.array([-2.0, 0.5, 1.0]))
        mis = wl.misspecified_wonham_spec(wl.qtilde_fixture("three_state"), h)
        exact = wl.exact_wonham_spec(q3, h)
        p = np.array([0.2, 0.5, 0.3])
        assert np.array_equal(mis.gain(0.0, p), exact.gain(0.0, p))

    def test_batch_matches_scalar(self, q3, rng):
        h = wl.SensorVector(np.array([-1.0, 0.0, 1.0]))
        spec = wl.misspecified_wonham_spec(q3, h, sigma=1.3)
        pb = np.stack([np.asarray(random_interior(rng, 3)) for _ in range(6)])
        drift_b = spec.drift_batch(0.0, pb)
        gain_b = spec.gain_batch(0.0, pb)
        for i in range(6):
            assert np.allclose(drift_b[i], spec.drift(0.0, pb[i]), atol=1e-15)
            assert np.allclose(gain_b[i], spec.gain(0.0, pb[i]), atol=1e-15)


class TestSchemeConsistency:
    def test_first_order_convergence_against_fine_reference(self, q2):
        # weak sensor so the deterministic O(dt) truncation dominates the
        # O(sqrt(dt)) stochastic term and the halving ratio is near 2
        h = wl.SensorVector(np.array([-0.05, 0.05]))
        init = wl.SimplexVector(np.array([0.8, 0.2]))
        dt0 = 4e-3
        fine = TimeGrid(dt=dt0 / 64, n_steps=int(round(1.0 / (dt0 / 64))))
        rng = np.random.default_rng(31)
        path = wl.sample_ctmc_path(q2, init, 1.0, rng)
        obs_fine = wl.simulate_observations(path, h, 1.0, fine, rng)
        ref = wl.integrate_wonham(q2, h, 1.0, obs_fine, init, scheme="ks").values

        def coarsen(factor):
            dY = obs_fine.dY.reshape(-1, factor).sum(axis=1)
            grid = TimeGrid(dt=fine.dt * factor, n_steps=dY.shape[0])
            return wl.ObservationIncrements(grid=grid, dY=dY, sigma=1.0), factor

        errors = {}
        diffs = {}
        for factor in (64, 32):
            obs, f = coarsen(factor)
            za = wl.integrate_wonham(q2, h, 1.0, obs, init, scheme="zakai").values
            ks = wl.integrate_wonham(q2, h, 1.0, obs, init, scheme="ks").values
            sub = ref[::f]
            errors[factor] = max(np.abs(za - sub).max(), np.abs(ks - sub).max())
            diffs[factor] = np.abs(za - ks).max()
        ratio = errors[64] / errors[32]
        assert 1.7 <= ratio <= 2.3
        # the two schemes agree within C*dt, with C estimated at the base step
        c_hat = diffs[64] / dt0
        assert diffs[32] <= 1.5 * c_hat * (dt0 / 2)


class TestBatchIntegration:
    def test_batch_matches_single_path(self, q2):
        h = wl.SensorVector(np.array([-1.0, 1.0]))
        grid = TimeGrid(dt=1e-3, n_steps=300)
        mu = wl.SimplexVector(np.array([0.5, 0.5]))
        dYs = np.empty((4, grid.n_steps))
        obs_list = []
        for p in range(4):
            rng = np.random.default_rng([77, p])
            path = wl.sample_ctmc_path(q2, mu, grid.end, rng)
            obs = wl.simulate_observations(path, h, 1.0, grid, rng)
            obs_list.append(obs)
            dYs[p] = obs.dY
        inits = np.tile(np.asarray(mu), (4, 1))
        for scheme in ("zakai", "ks"):
            batch = integrate_wonham_batch(q2, h, 1.0, dYs, inits, grid, scheme)
            for p in range(4):
                single = wl.integrate_wonham(q2, h, 1.0, obs_list[p], mu, scheme)
                assert np.array_equal(batch[p], single.values)
        spec = wl.exact_wonham_spec(q2, h)
        batch = integrate_spec_batch(spec, dYs, inits, grid)
        for p in range(4):
            single = wl.integrate_generic(spec, obs_list[p], mu)
            assert np.array_equal(batch[p], single.values)
