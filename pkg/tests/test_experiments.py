import csv
import io
import json

import numpy as np
import pytest

import wonham_lab as wl
from wonham_lab.errors import BoundViolation, SchemaMismatch
from wonham_lab.experiments import (
    MODEL_FIXTURES,
    bounds_from_trajectories,
    figure_config,
    parse_config,
    reproduce_figure,
    result_manifest,
    result_to_csv,
    run_scenario,
    trajectories_from_csv,
    trajectory_to_csv,
    write_result,
)


def small_config(**overrides):
    cfg = {
        "label": "small",
        "model": {"kind": "explicit", "q": [[-1.0, 1.0], [1.0, -1.0]]},
        "h": {"kind": "explicit", "values": [-1.0, 1.0]},
        "sigma": 1.0,
        "mu": {"kind": "explicit", "values": [0.5, 0.5]},
        "nu": {"kind": "explicit", "values": [0.4, 0.6]},
        "approx": {"kind": "none"},
        "T": 0.5,
        "dt": 1e-3,
        "n_paths": 3,
        "master_seed": 99,
        "bounds": ["det", "pathwise_simple", "ode"],
        "tolerance": 0.05,
    }
    cfg.update(overrides)
    return cfg


class TestParseConfig:
    def test_sources_resolve(self):
        cfg = parse_config(small_config())
        assert cfg.q.n_states == 2
        assert cfg.strict  # stability scenarios are strict by default

    def test_stationary_and_perturb_sources(self):
        cfg = parse_config(
            small_config(
                model={"kind": "cyclic", "n": 3},
                h={"kind": "random", "seed": 5},
                mu={"kind": "stationary"},
                nu={"kind": "perturb", "seed": 6},
            )
        )
        assert np.allclose(np.asarray(cfg.mu), 0.25, atol=1e-12)
        assert np.asarray(cfg.nu).min() > 0

    def test_fixture_model_with_approximation(self):
        cfg = parse_config(figure_config("fig4:3"))
        assert cfg.has_approx
        assert not cfg.strict
        assert cfg.T == 10.0

    def test_unknown_kind_rejected(self):
        with pytest.raises(SchemaMismatch):
            parse_config(small_config(model={"kind": "magic"}))
        with pytest.raises(SchemaMismatch):
            parse_config(small_config(bounds=["det", "sharp"]))


class TestRunScenario:
    def test_deterministic_csv_bytes(self):
        a = result_to_csv(run_scenario(parse_config(small_config())))
        b = result_to_csv(run_scenario(parse_config(small_config())))
        assert a == b

    def test_single_path_deterministic(self):
        cfg = small_config(n_paths=1)
        a = result_to_csv(run_scenario(parse_config(cfg)))
        b = result_to_csv(run_scenario(parse_config(cfg)))
        assert a == b

    def test_initial_error_value(self):
        res = run_scenario(parse_config(small_config()))
        assert res.initial_hilbert == pytest.approx(np.log(1.5), abs=1e-14)
        assert np.allclose(res.series["h_error"][:, 0], np.log(1.5), atol=1e-10)

    def test_loud_failure_on_violation(self):
        # an impossible tolerance turns any positive error into a violation
        with pytest.raises(BoundViolation):
            run_scenario(parse_config(small_config(tolerance=-1.0)))

    def test_violations_recorded_when_not_strict(self):
        cfg = parse_config(small_config(tolerance=-1.0, strict=False))
        res = run_scenario(cfg)
        assert all(v.all() for v in res.violations.values())

    def test_trajectories_stored(self):
        res = run_scenario(parse_config(small_config(n_paths=2)))
        assert res.pi_values.shape == (2, 501, 2)
        assert res.pitilde_values.shape == (2, 501, 2)

    def test_component_error_carries_path_index(self):
        # a sensor violent enough to overflow one integration step
        from wonham_lab.errors import NonFiniteState

        cfg = small_config(
            h={"kind": "explicit", "values": [-1e155, 1e155]},
            T=2.0,
            dt=1.0,
            n_paths=2,
            bounds=["det"],
        )
        with np.errstate(over="ignore"), pytest.raises(NonFiniteState) as exc:
            run_scenario(parse_config(cfg))
        assert exc.value.path is not None


class TestCsvOutput:
    def test_header_and_metric_set(self):
        res = run_scenario(parse_config(small_config()))
        text = result_to_csv(res)
        rows = list(csv.reader(io.StringIO(text)))
        assert rows[0] == ["run_id", "path", "t", "metric", "value"]
        metrics = {r[3] for r in rows[1:]}
        assert {
            "h_error",
            "tanh_error",
            "bound_det",
            "bound_pathwise_simple",
            "bound_ode",
            "bound_ode_tanh",
            "mean_h_error",
        } <= metrics

    def test_constant_metric_emitted_once_under_path_minus_one(self):
        res = run_scenario(parse_config(small_config()))
        rows = list(csv.reader(io.StringIO(result_to_csv(res))))
        det_paths = {r[1] for r in rows[1:] if r[3] == "bound_det"}
        assert det_paths == {"-1"}  # stability: same bound for every path

    def test_mean_rows_under_path_minus_one(self):
        res = run_scenario(parse_config(small_config()))
        rows = list(csv.reader(io.StringIO(result_to_csv(res))))
        mean_paths = {r[1] for r in rows[1:] if r[3].startswith("mean_")}
        assert mean_paths == {"-1"}

    def test_float_format_is_full_precision(self):
        res = run_scenario(parse_config(small_config(n_paths=1)))
        rows = list(csv.reader(io.StringIO(result_to_csv(res))))
        values = [r[4] for r in rows[1:] if r[3] == "h_error"]
        assert any(len(v.split(".")[-1]) > 10 for v in values)

    def test_manifest_contents(self):
        res = run_scenario(parse_config(small_config()))
        doc = json.loads(result_manifest(res))
        assert doc["run_id"] == "small"
        assert doc["config"]["master_seed"] == 99
        assert doc["config"]["q"] == [[-1.0, 1.0], [1.0, -1.0]]
        assert "local_time_terms" in doc

    def test_write_result_files(self, tmp_path):
        res = run_scenario(parse_config(small_config()))
        paths = write_result(res, str(tmp_path))
        assert all((tmp_path / p.split("/")[-1]).exists() for p in paths)


class TestFigurePresets:
    def test_fig1_initial_bound_value(self):
        cfg = parse_config(figure_config("fig1"))
        assert wl.hilbert_distance(cfg.mu, cfg.nu) == pytest.approx(np.log(1.5), abs=1e-14)
        assert cfg.T == 5.0 and cfg.n_paths == 100

    def test_fig2_has_all_three_bounds(self):
        cfg = figure_config("fig2:20")
        assert set(cfg["bounds"]) == {"det", "pathwise_simple", "ode"}
        assert cfg["n_paths"] == 50

    def test_fig4_fixture_wiring(self):
        cfg = parse_config(figure_config("fig4:3"))
        assert np.array_equal(np.asarray(cfg.qtilde), np.asarray(wl.qtilde_fixture("three_state")))
        assert np.array_equal(np.asarray(cfg.h), MODEL_FIXTURES["three_state"]["h"])
        assert np.array_equal(np.asarray(cfg.nu), [0.2, 0.2, 0.6])

    def test_paper_scale_paths(self):
        assert figure_config("fig1", paper_scale=True)["n_paths"] == 300

    def test_unknown_preset(self):
        with pytest.raises(SchemaMismatch):
            figure_config("fig9")

    def test_reproduce_smoke_small_grid(self, tmp_path, monkeypatch):
        # shrink the preset so the smoke test stays fast
        import wonham_lab.experiments as ex

        base = figure_config("fig1")
        base.update(T=0.2, n_paths=2)
        monkeypatch.setattr(ex, "figure_config", lambda which, paper_scale=False: base)
        files = ex.reproduce_figure("fig1", str(tmp_path))
        assert len(files) == 2
        rows = list(csv.reader(open(files[0], encoding="utf-8")))
        det0 = [r for r in rows[1:] if r[3] == "bound_det" and float(r[2]) == 0.0]
        assert float(det0[0][4]) == pytest.approx(np.log(1.5), abs=1e-14)


class TestTrajectoryInterchange:
    def _make_traj(self):
        cfg = parse_config(small_config(n_paths=1, T=0.1))
        res = run_scenario(cfg)
        from wonham_lab.filtering import FilterTrajectory

        return FilterTrajectory(
            grid=res.grid, values=res.pitilde_values[0], spec_label="x"
        )

    def test_round_trip(self):
        traj = self._make_traj()
        text = trajectory_to_csv(traj, "run", path_id=4)
        back = trajectories_from_csv(text)
        assert set(back) == {4}
        assert np.allclose(back[4].values, traj.values, atol=1e-16)
        assert back[4].grid.dt == pytest.approx(traj.grid.dt)

    def test_rejects_foreign_csv(self):
        with pytest.raises(SchemaMismatch):
            trajectories_from_csv("a,b\n1,2\n")

    def test_bounds_from_trajectories(self, tmp_path):
        traj = self._make_traj()
        p = tmp_path / "traj.csv"
        p.write_text(trajectory_to_csv(traj, "run", path_id=0), encoding="utf-8")
        cfg = {
            "q": [[-1.0, 1.0], [1.0, -1.0]],
            "trajectory_csv": str(p),
            "initial_hilbert": float(np.log(1.5)),
            "bounds": ["det", "pathwise_simple", "ode"],
        }
        out = bounds_from_trajectories(cfg)
        rows = list(csv.reader(io.StringIO(out)))
        metrics = {r[3] for r in rows[1:]}
        assert {"bound_det", "bound_pathwise_simple", "bound_ode", "bound_ode_tanh"} <= metrics
        det0 = [r for r in rows[1:] if r[3] == "bound_det" and float(r[2]) == 0.0]
        assert float(det0[0][4]) == pytest.approx(np.log(1.5), abs=1e-12)

    def test_bounds_with_misspecified_drift(self, tmp_path, q3):
        # 3-state trajectory with a rate-mismatch drift input
        rows = np.tile(np.array([0.2, 0.3, 0.5]), (11, 1))
        from wonham_lab.ctmc import TimeGrid
        from wonham_lab.filtering import FilterTrajectory

        traj = FilterTrajectory(
            grid=TimeGrid(dt=0.1, n_steps=10), values=rows, spec_label="x"
        )
        p = tmp_path / "traj.csv"
        p.write_text(trajectory_to_csv(traj, "run"), encoding="utf-8")
        cfg = {
            "q": np.asarray(q3).tolist(),
            "qtilde": np.asarray(wl.qtilde_fixture("three_state")).tolist(),
            "h": [-1.0, 0.0, 1.0],
            "trajectory_csv": str(p),
            "initial_hilbert": 0.5,
            "bounds": ["det"],
        }
        out = bounds_from_trajectories(cfg)
        rows_out = [r for r in csv.reader(io.StringIO(out))][1:]
        values = np.array([float(r[4]) for r in rows_out if r[3] == "bound_det"])
        assert values[0] == pytest.approx(0.5, abs=1e-12)
        assert values[-1] > 0.0


class TestExpectedBoundOnMonteCarloData:
    def test_dominance_chain(self, q3):
        # sample-mean error <= assembled expected bound <= the coarser
        # rate-mismatch/min-entry version
        cfg = parse_config(
            {
                "label": "expdom",
                "model": {"kind": "fixture", "name": "three_state"},
                "h": {"kind": "explicit", "values": [-1.0, 0.0, 1.0]},
                "mu": {"kind": "explicit", "values": [0.3, 0.3, 0.4]},
                "nu": {"kind": "explicit", "values": [0.2, 0.2, 0.6]},
                "approx": {"kind": "misspecified", "qtilde_fixture": "three_state"},
                "T": 2.0,
                "dt": 1e-3,
                "n_paths": 20,
                "master_seed": 4242,
                "bounds": ["det"],
            }
        )
        res = run_scenario(cfg)
        lam = wl.deterministic_rate(cfg.q)
        hmax = float(np.abs(np.asarray(cfg.h)).max())
        dq = np.asarray(cfg.q) - np.asarray(cfg.qtilde)
        vals = res.pitilde_values
        d = (vals @ dq) / vals
        drift = d.max(axis=2) - d.min(axis=2)  # (paths, n_t)
        mean_err = res.series["h_error"].mean(axis=0)
        zeros = np.zeros(res.grid.n_steps + 1)
        bound = wl.expected_error_bound(
            lam, res.initial_hilbert, drift.mean(axis=0), zeros, hmax, res.grid
        )
        assert np.all(mean_err <= bound.values * 1.05)
        # coarser version: drift dominated by K_q / min-entry, pathwise
        kq, _, _ = wl.robustness_constants(cfg.q, cfg.qtilde, cfg.h, cfg.h)
        inv_min = (1.0 / vals.min(axis=2)).mean(axis=0)
        coarse = wl.expected_error_bound(
            lam, res.initial_hilbert, kq * inv_min, zeros, hmax, res.grid
        )
        assert np.all(bound.values <= coarse.values * (1 + 1e-9))


class TestLocalTimeTrend:
    def test_vanishes_as_sensor_mismatch_shrinks(self):
        from wonham_lab.experiments import local_time_trend

        totals = local_time_trend(scales=(1.0, 0.5, 0.1), n_paths=4, T=1.5)
        assert totals[0] > totals[1] > totals[2]


class TestCli:
    def test_reproduce_and_bounds_commands(self, tmp_path, monkeypatch):
        import wonham_lab.experiments as ex
        from wonham_lab.cli import main

        base = figure_config("fig1")
        base.update(T=0.1, n_paths=1)
        monkeypatch.setattr(ex, "figure_config", lambda which, paper_scale=False: base)
        assert main(["reproduce", "--figure", "fig1", "--out", str(tmp_path)]) == 0
        assert (tmp_path / "fig1.csv").exists()
        assert (tmp_path / "fig1_manifest.json").exists()

    def test_simulate_command(self, tmp_path):
        from wonham_lab.cli import main

        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps(small_config(T=0.1, n_paths=1)), encoding="utf-8")
        assert main(["simulate", "--config", str(cfg_path), "--out", str(tmp_path)]) == 0
        assert (tmp_path / "small.csv").exists()
