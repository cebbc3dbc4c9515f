"""Config-driven Monte Carlo harness, CSV emission, and bundled presets.

One run samples n_paths hidden paths and observation records, integrates
the exact filter from mu and a second (wrongly initialized or misspecified)
filter from nu on the *same* increments, and evaluates the requested error
bounds pathwise. Everything is deterministic given the master seed: path
p uses the stream seeded by [master_seed, p], drawing the hidden path
first and the observation noise second.

CSV output is long format with columns run_id, path, t, metric, value.
Path-independent series (e.g. the deterministic bound in stability runs)
and cross-path means are emitted once under path = -1.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import os
from dataclasses import dataclass, field

import numpy as np

from . import __version__ as _version
from .bounds import (
    BoundKind,
    combined_drift_error,
    deterministic_rate,
    discounted_accumulate_batch,
    e3_spread,
    error_terms,
    estimate_local_time,
    exponential_bound,
    hilbert_scale,
    pathwise_rate_simple_series,
    solve_bound_ode,
    solve_bound_ode_batch,
)
from .ctmc import (
    EPS_FLOOR,
    RateMatrix,
    SensorVector,
    SimplexVector,
    TimeGrid,
    cyclic_rate_matrix,
    perturb_initial,
    random_sensor,
    sample_ctmc_path,
    stationary_distribution,
    validate_rate_matrix,
)
from .errors import BoundViolation, SchemaMismatch
from .filtering import (
    FilterTrajectory,
    exact_wonham_spec,
    integrate_generic,
    integrate_spec_batch,
    integrate_wonham_batch,
    misspecified_wonham_spec,
    simulate_observations,
)
from .hilbert import hilbert_distance
from .qapprox import qtilde_fixture

BOUND_CHOICES = ("det", "pathwise_simple", "ode")
CSV_HEADER = ("run_id", "path", "t", "metric", "value")

# True-model fixtures for the approximation experiments.
MODEL_FIXTURES: dict[str, dict] = {
    "three_state": {
        "q": [[-3.0, 1.0, 2.0], [1.0, -3.0, 2.0], [1.5, 1.5, -3.0]],
        "h": [-1.0, 0.0, 1.0],
        "mu": [0.3, 0.3, 0.4],
        "nu": [0.2, 0.2, 0.6],
    },
    "six_state": {
        "q": [
            [-9.0, 3.0, 1.0, 1.5, 2.5, 1.0],
            [1.0, -7.5, 1.0, 2.0, 2.3, 1.2],
            [3.0, 2.0, -8.0, 1.0, 1.0, 1.0],
            [2.0, 1.3, 1.0, -6.0, 0.7, 1.0],
            [1.1, 1.0, 0.9, 3.0, -9.0, 3.0],
            [1.0, 1.0, 3.0, 2.0, 2.5, -9.5],
        ],
        "h": [-3.0, -2.0, -1.0, 1.0, 2.0, 3.0],
        "mu": [0.5, 0.04, 0.09, 0.2, 0.04, 0.13],
        "nu": [0.25, 0.1, 0.06, 0.07, 0.22, 0.3],
    },
}


@dataclass(frozen=True)
class ScenarioConfig:
    """Fully resolved scenario: all sources materialized to arrays."""

    q: RateMatrix
    h: SensorVector
    sigma: float
    mu: SimplexVector
    nu: SimplexVector
    qtilde: RateMatrix | None
    htilde: SensorVector | None
    T: float
    dt: float
    n_paths: int
    master_seed: int
    bounds: tuple[str, ...]
    tolerance: float
    label: str
    csv_stride: int
    strict: bool
    raw: dict = field(repr=False, default_factory=dict)

    @property
    def grid(self) -> TimeGrid:
        return TimeGrid(dt=self.dt, n_steps=int(round(self.T / self.dt)))

    @property
    def has_approx(self) -> bool:
        return self.qtilde is not None


def parse_config(cfg: dict) -> ScenarioConfig:
    """Resolve a raw config dict (see README for the schema)."""
    model = cfg["model"]
    kind = model["kind"]
    if kind == "explicit":
        q = validate_rate_matrix(model["q"])
    elif kind == "cyclic":
        q = cyclic_rate_matrix(int(model["n"]))
    elif kind == "fixture":
        q = validate_rate_matrix(MODEL_FIXTURES[model["name"]]["q"])
    else:
        raise SchemaMismatch(f"unknown model kind {kind!r}")

    hsrc = cfg["h"]
    if hsrc["kind"] == "explicit":
        h = SensorVector(np.asarray(hsrc["values"], dtype=float))
    elif hsrc["kind"] == "random":
        h = random_sensor(q.n_states - 1, np.random.default_rng(int(hsrc["seed"])))
    else:
        raise SchemaMismatch(f"unknown h kind {hsrc['kind']!r}")

    musrc = cfg["mu"]
    if musrc["kind"] == "explicit":
        mu = SimplexVector(np.asarray(musrc["values"], dtype=float))
    elif musrc["kind"] == "stationary":
        mu = stationary_distribution(q)
    else:
        raise SchemaMismatch(f"unknown mu kind {musrc['kind']!r}")

    nusrc = cfg["nu"]
    if nusrc["kind"] == "explicit":
        nu = SimplexVector(np.asarray(nusrc["values"], dtype=float))
    elif nusrc["kind"] == "perturb":
        nu = perturb_initial(mu, np.random.default_rng(int(nusrc["seed"])))
    else:
        raise SchemaMismatch(f"unknown nu kind {nusrc['kind']!r}")

    approx = cfg.get("approx", {"kind": "none"})
    qtilde = None
    htilde = None
    if approx["kind"] == "misspecified":
        if "qtilde_fixture" in approx:
            qtilde = qtilde_fixture(approx["qtilde_fixture"])
        else:
            qtilde = validate_rate_matrix(approx["qtilde"])
        htilde = SensorVector(
            np.asarray(approx.get("htilde", np.asarray(h)), dtype=float)
        )
    elif approx["kind"] != "none":
        raise SchemaMismatch(f"unknown approx kind {approx['kind']!r}")

    T = float(cfg["T"])
    dt = float(cfg["dt"])
    n_steps = int(round(T / dt))
    if n_steps < 1 or T <= 0 or dt <= 0:
        raise SchemaMismatch("need T > 0, dt > 0")
    n_paths = int(cfg["n_paths"])
    if n_paths < 1:
        raise SchemaMismatch("need n_paths >= 1")
    bounds = tuple(cfg.get("bounds", ["det"]))
    for b in bounds:
        if b not in BOUND_CHOICES:
            raise SchemaMismatch(f"unknown bound kind {b!r}")
    stride = cfg.get("csv_stride")
    if stride is None:
        stride = max(1, n_steps // 1000)
    return ScenarioConfig(
        q=q,
        h=h,
        sigma=float(cfg.get("sigma", 1.0)),
        mu=mu,
        nu=nu,
        qtilde=qtilde,
        htilde=htilde,
        T=T,
        dt=dt,
        n_paths=n_paths,
        master_seed=int(cfg["master_seed"]),
        bounds=bounds,
        tolerance=float(cfg.get("tolerance", 0.05)),
        label=str(cfg.get("label", "run")),
        csv_stride=int(stride),
        strict=bool(cfg.get("strict", approx["kind"] == "none")),
        raw=cfg,
    )


@dataclass
class RunResult:
    """Per-path, per-time error and bound series plus violation flags.

    ``pi_values`` / ``pitilde_values`` keep the integrated trajectories
    (n_paths, n_t, n_states) for downstream checks.
    """

    config: ScenarioConfig
    grid: TimeGrid
    initial_hilbert: float
    series: dict[str, np.ndarray]  # metric -> (n_paths, n_t)
    violations: dict[str, np.ndarray]  # metric -> (n_paths,) bool
    local_time_note: str = ""
    pi_values: np.ndarray | None = None
    pitilde_values: np.ndarray | None = None

    def mean(self, metric: str) -> np.ndarray:
        return self.series[metric].mean(axis=0)

    def path_constant_metrics(self) -> set[str]:
        out = set()
        for name, arr in self.series.items():
            if np.all(arr == arr[0]):
                out.add(name)
        return out


def _path_rng(master_seed: int, path: int) -> np.random.Generator:
    # documented counter construction: one child stream per path index
    return np.random.default_rng([master_seed, path])


def run_scenario(cfg: ScenarioConfig) -> RunResult:
    """Run the Monte Carlo scenario; see the module docstring.

    In strict mode (default for stability scenarios) any pathwise bound
    violation beyond the configured tolerance raises ``BoundViolation``
    instead of being averaged away.
    """
    grid = cfg.grid
    n_t = grid.n_steps + 1
    h0 = hilbert_distance(cfg.mu, cfg.nu)
    lam = deterministic_rate(cfg.q)
    spec = (
        misspecified_wonham_spec(cfg.qtilde, cfg.htilde, cfg.sigma)
        if cfg.has_approx
        else None
    )
    exact_spec = exact_wonham_spec(cfg.q, cfg.h, cfg.sigma) if cfg.has_approx else None

    metrics = ["h_error", "tanh_error"]
    if "det" in cfg.bounds:
        metrics.append("bound_det")
    if "pathwise_simple" in cfg.bounds:
        metrics.append("bound_pathwise_simple")
    if "ode" in cfg.bounds:
        metrics += ["bound_ode", "bound_ode_tanh"]
    series = {m: np.empty((cfg.n_paths, n_t)) for m in metrics}

    # sample all hidden paths and observation records first (per-path streams)
    dYs = np.empty((cfg.n_paths, grid.n_steps))
    for p in range(cfg.n_paths):
        rng = _path_rng(cfg.master_seed, p)
        try:
            path = sample_ctmc_path(cfg.q, cfg.mu, cfg.T, rng)
            obs = simulate_observations(path, cfg.h, cfg.sigma, grid, rng)
        except Exception as exc:
            raise type(exc)(f"path {p}: {exc}") from exc
        dYs[p] = obs.dY

    # same-observation discipline: both filters must consume identical bytes
    digest = hashlib.sha256(dYs.tobytes()).hexdigest()
    mu_init = np.tile(np.asarray(cfg.mu), (cfg.n_paths, 1))
    nu_init = np.tile(np.asarray(cfg.nu), (cfg.n_paths, 1))
    if cfg.has_approx:
        pi_vals = integrate_spec_batch(exact_spec, dYs, mu_init, grid)
        assert hashlib.sha256(dYs.tobytes()).hexdigest() == digest
        pt_vals = integrate_spec_batch(spec, dYs, nu_init, grid)
    else:
        pi_vals = integrate_wonham_batch(cfg.q, cfg.h, cfg.sigma, dYs, mu_init, grid)
        assert hashlib.sha256(dYs.tobytes()).hexdigest() == digest
        pt_vals = integrate_wonham_batch(cfg.q, cfg.h, cfg.sigma, dYs, nu_init, grid)
    assert hashlib.sha256(dYs.tobytes()).hexdigest() == digest

    logr = np.log(pi_vals) - np.log(pt_vals)
    err = logr.max(axis=2) - logr.min(axis=2)
    series["h_error"][:] = err
    series["tanh_error"][:] = np.tanh(err / 4.0)

    e3_vanishes = True
    drift = np.zeros((cfg.n_paths, n_t))
    if cfg.has_approx:
        for p in range(cfg.n_paths):
            traj = FilterTrajectory(grid=grid, values=pt_vals[p], spec_label=spec.label)
            terms = error_terms(cfg.q, cfg.h, spec, traj)
            drift[p] = combined_drift_error(terms)
            if e3_spread(terms).max() > 1e-8:
                e3_vanishes = False

    if "bound_det" in series:
        series["bound_det"][:] = discounted_accumulate_batch(
            np.full(cfg.n_paths, h0), np.full((cfg.n_paths, n_t), lam), drift, cfg.dt
        )
    if "bound_pathwise_simple" in series:
        rates = pathwise_rate_simple_series(
            cfg.q, pt_vals.reshape(-1, cfg.q.n_states)
        ).reshape(cfg.n_paths, n_t)
        series["bound_pathwise_simple"][:] = discounted_accumulate_batch(
            np.full(cfg.n_paths, h0), rates, drift, cfg.dt
        )
    if "bound_ode" in series:
        # chunk over paths so the per-step (m, n, n, n) tensors stay small
        n = cfg.q.n_states
        chunk = max(1, int(2_000_000 // max(n**3, 1)))
        u0 = np.full(cfg.n_paths, np.tanh(h0 / 4.0))
        for lo in range(0, cfg.n_paths, chunk):
            sel = slice(lo, lo + chunk)
            u = solve_bound_ode_batch(cfg.q, pt_vals[sel], drift[sel], u0[sel], cfg.dt)
            series["bound_ode_tanh"][sel] = u
            series["bound_ode"][sel] = 4.0 * np.arctanh(u)

    # comparisons where both sides sit at the interior-floor noise scale are
    # vacuous (long stability runs decay into pure rounding)
    noise_floor = 100.0 * EPS_FLOOR
    violations: dict[str, np.ndarray] = {}
    tol = cfg.tolerance
    for name in ("bound_det", "bound_pathwise_simple", "bound_ode"):
        if name in series:
            exceeded = series["h_error"] > np.maximum(
                series[name] * (1.0 + tol), noise_floor
            )
            violations[name] = np.any(exceeded, axis=1)
    if "bound_ode_tanh" in series:
        exceeded = series["tanh_error"] > np.maximum(
            series["bound_ode_tanh"] * (1.0 + tol), noise_floor
        )
        violations["bound_ode_tanh"] = np.any(exceeded, axis=1)
    if cfg.strict:
        for name, flags in violations.items():
            if flags.any():
                p = int(np.nonzero(flags)[0][0])
                raise BoundViolation(
                    f"{cfg.label}: path {p} violates {name} beyond {tol:.0%}"
                )

    if not cfg.has_approx:
        note = "no approximate filter; no local-time terms"
    elif e3_vanishes:
        note = "exact zero (gain-mismatch differences vanish identically)"
    elif cfg.q.n_states <= 4:
        note = "evaluable (n_states <= 4 and sensor mismatch present)"
    else:
        note = "not evaluated (n_states > 4)"

    return RunResult(
        config=cfg,
        grid=grid,
        initial_hilbert=h0,
        series=series,
        violations=violations,
        local_time_note=note,
        pi_values=pi_vals,
        pitilde_values=pt_vals,
    )


# ---------------------------------------------------------------------------
# CSV and manifest output
# ---------------------------------------------------------------------------


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def result_to_csv(result: RunResult) -> str:
    """Long-format CSV, strided in time per the config; deterministic bytes."""
    grid_times = result.grid.times
    stride = result.config.csv_stride
    idx = np.arange(0, grid_times.shape[0], stride)
    if idx[-1] != grid_times.shape[0] - 1:
        idx = np.append(idx, grid_times.shape[0] - 1)
    times = grid_times[idx]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    run_id = result.config.label
    constant = result.path_constant_metrics()
    for metric in sorted(result.series):
        arr = result.series[metric]
        if metric in constant:
            for t, v in zip(times, arr[0, idx]):
                w.writerow((run_id, -1, _fmt(t), metric, _fmt(v)))
        else:
            for p in range(arr.shape[0]):
                row = arr[p, idx]
                for t, v in zip(times, row):
                    w.writerow((run_id, p, _fmt(t), metric, _fmt(v)))
            mean = arr.mean(axis=0)[idx]
            for t, v in zip(times, mean):
                w.writerow((run_id, -1, _fmt(t), f"mean_{metric}", _fmt(v)))
    return buf.getvalue()


def _jsonable_config(cfg: ScenarioConfig) -> dict:
    return {
        "label": cfg.label,
        "q": np.asarray(cfg.q).tolist(),
        "h": np.asarray(cfg.h).tolist(),
        "sigma": cfg.sigma,
        "mu": np.asarray(cfg.mu).tolist(),
        "nu": np.asarray(cfg.nu).tolist(),
        "qtilde": np.asarray(cfg.qtilde).tolist() if cfg.has_approx else None,
        "htilde": np.asarray(cfg.htilde).tolist() if cfg.has_approx else None,
        "T": cfg.T,
        "dt": cfg.dt,
        "n_paths": cfg.n_paths,
        "master_seed": cfg.master_seed,
        "bounds": list(cfg.bounds),
        "tolerance": cfg.tolerance,
        "csv_stride": cfg.csv_stride,
        "strict": cfg.strict,
    }


def result_manifest(result: RunResult) -> str:
    doc = {
        "run_id": result.config.label,
        "package_version": _version,
        "config": _jsonable_config(result.config),
        "initial_hilbert": result.initial_hilbert,
        "violations": {k: int(v.sum()) for k, v in result.violations.items()},
        "local_time_terms": result.local_time_note,
    }
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def write_result(result: RunResult, out_dir: str) -> list[str]:
    os.makedirs(out_dir, exist_ok=True)
    stem = result.config.label.replace(":", "_")
    csv_path = os.path.join(out_dir, f"{stem}.csv")
    manifest_path = os.path.join(out_dir, f"{stem}_manifest.json")
    with open(csv_path, "w", encoding="utf-8", newline="") as fh:
        fh.write(result_to_csv(result))
    with open(manifest_path, "w", encoding="utf-8") as fh:
        fh.write(result_manifest(result))
    return [csv_path, manifest_path]


# ---------------------------------------------------------------------------
# figure presets
# ---------------------------------------------------------------------------

FIG1_SEED = 230111
FIG2_SEED = 230222
FIG4_SEED = 230444
DESK_PATHS = 100
PAPER_PATHS = 300


def figure_config(which: str, paper_scale: bool = False) -> dict:
    """Raw config dict for a bundled figure preset.

    ``which`` is one of fig1, fig2:<n>, fig4:3, fig4:6. Desk scale keeps
    runs CI-sized (100 paths; 50 for fig2); --paper-scale restores 300.
    """
    if which == "fig1":
        return {
            "label": "fig1",
            "model": {"kind": "explicit", "q": [[-1.0, 1.0], [1.0, -1.0]]},
            "h": {"kind": "explicit", "values": [-1.0, 1.0]},
            "sigma": 1.0,
            "mu": {"kind": "explicit", "values": [0.5, 0.5]},
            "nu": {"kind": "explicit", "values": [0.4, 0.6]},
            "approx": {"kind": "none"},
            "T": 5.0,
            "dt": 1e-3,
            "n_paths": PAPER_PATHS if paper_scale else DESK_PATHS,
            "master_seed": FIG1_SEED,
            "bounds": ["det", "ode"],
            "tolerance": 0.05,
        }
    if which.startswith("fig2:"):
        # the random sensor spans roughly [-10, 11]; explicit Euler needs a
        # finer step than the other presets to stay stable early on
        n = int(which.split(":", 1)[1])
        return {
            "label": f"fig2:{n}",
            "model": {"kind": "cyclic", "n": n},
            "h": {"kind": "random", "seed": FIG2_SEED + 7 * n},
            "sigma": 1.0,
            "mu": {"kind": "stationary"},
            "nu": {"kind": "perturb", "seed": FIG2_SEED + 7 * n + 1},
            "approx": {"kind": "none"},
            "T": 1.0,
            "dt": 5e-4,
            "n_paths": PAPER_PATHS if paper_scale else 50,
            "master_seed": FIG2_SEED + n,
            "bounds": ["det", "pathwise_simple", "ode"],
            "tolerance": 0.05,
        }
    if which in ("fig4:3", "fig4:6"):
        name = "three_state" if which.endswith("3") else "six_state"
        fx = MODEL_FIXTURES[name]
        return {
            "label": which,
            "model": {"kind": "fixture", "name": name},
            "h": {"kind": "explicit", "values": fx["h"]},
            "sigma": 1.0,
            "mu": {"kind": "explicit", "values": fx["mu"]},
            "nu": {"kind": "explicit", "values": fx["nu"]},
            "approx": {"kind": "misspecified", "qtilde_fixture": name},
            "T": 10.0,
            "dt": 1e-3,
            "n_paths": 100,
            "master_seed": FIG4_SEED + (3 if name == "three_state" else 6),
            "bounds": ["det", "pathwise_simple", "ode"],
            "tolerance": 0.05,
        }
    raise SchemaMismatch(f"unknown figure preset {which!r}")


def reproduce_figure(which: str, out_dir: str, paper_scale: bool = False) -> list[str]:
    """Run a bundled preset and write its CSV and manifest to out_dir."""
    cfg = parse_config(figure_config(which, paper_scale))
    result = run_scenario(cfg)
    return write_result(result, out_dir)


def local_time_trend(
    scales: tuple[float, ...] = (1.0, 0.5, 0.1),
    n_paths: int = 5,
    T: float = 2.0,
    dt: float = 1e-3,
    master_seed: int = 230777,
) -> list[float]:
    """Observe the vanishing of the local-time terms as the misspecified
    sensor moves toward the true one.

    Runs the 3-state fixture with htilde = h + s * mismatch for each scale
    s, sums the local-time estimates of all pairwise gap differences at the
    horizon, and returns the cross-path means (largest mismatch first).
    This is a qualitative observation, not a bound check.
    """
    fx = MODEL_FIXTURES["three_state"]
    q = validate_rate_matrix(fx["q"])
    h = SensorVector(np.asarray(fx["h"], dtype=float))
    mu = SimplexVector(np.asarray(fx["mu"], dtype=float))
    nu = SimplexVector(np.asarray(fx["nu"], dtype=float))
    mismatch = np.array([0.4, -0.3, 0.5])
    grid = TimeGrid(dt=dt, n_steps=int(round(T / dt)))
    eps = 10.0 * np.sqrt(dt)
    n = q.n_states
    pairs = [(i, k) for i in range(n) for k in range(n)]  # diagonal included
    out = []
    for s in scales:
        htilde = SensorVector(np.asarray(h) + s * mismatch)
        spec = misspecified_wonham_spec(q, htilde)
        exact = exact_wonham_spec(q, h)
        totals = []
        for p in range(n_paths):
            rng = _path_rng(master_seed, p)
            path = sample_ctmc_path(q, mu, T, rng)
            obs = simulate_observations(path, h, 1.0, grid, rng)
            pi = integrate_generic(exact, obs, mu)
            pitilde = integrate_generic(spec, obs, nu)
            a = np.log(pi.values) - np.log(pitilde.values)
            gaps = {(i, k): a[:, i] - a[:, k] for i, k in pairs}
            total = 0.0
            for ik in pairs:
                for jl in pairs:
                    if ik == jl:
                        continue
                    diff = gaps[ik] - gaps[jl]
                    total += estimate_local_time(diff, grid, eps).values[-1]
            totals.append(total)
        out.append(float(np.mean(totals)))
    return out


# ---------------------------------------------------------------------------
# trajectory CSV interchange (used by the bounds CLI)
# ---------------------------------------------------------------------------


def trajectory_to_csv(traj: FilterTrajectory, run_id: str, path_id: int = 0) -> str:
    """Export one trajectory in the long CSV format, metric = state_<i>."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    times = traj.grid.times
    for i in range(traj.n_states):
        metric = f"state_{i}"
        col = traj.values[:, i]
        for t, v in zip(times, col):
            w.writerow((run_id, path_id, _fmt(t), metric, _fmt(v)))
    return buf.getvalue()


def trajectories_from_csv(text: str) -> dict[int, FilterTrajectory]:
    """Rebuild per-path trajectories from the long CSV format."""
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header is None or tuple(header) != CSV_HEADER:
        raise SchemaMismatch(f"expected header {','.join(CSV_HEADER)}")
    data: dict[int, dict[int, dict[float, float]]] = {}
    for row in reader:
        _, path, t, metric, value = row
        if not metric.startswith("state_"):
            continue
        i = int(metric.split("_", 1)[1])
        data.setdefault(int(path), {}).setdefault(i, {})[float(t)] = float(value)
    if not data:
        raise SchemaMismatch("no state_<i> rows found in trajectory CSV")
    out = {}
    for path, cols in data.items():
        n_states = 1 + max(cols)
        times = np.array(sorted(cols[0]))
        dts = np.diff(times)
        if times.shape[0] < 2 or np.any(np.abs(dts - dts[0]) > 1e-9 * dts[0]):
            raise SchemaMismatch("trajectory CSV times are not a uniform grid")
        grid = TimeGrid(dt=float(dts[0]), n_steps=times.shape[0] - 1, t0=float(times[0]))
        values = np.column_stack(
            [np.array([cols[i][t] for t in times]) for i in range(n_states)]
        )
        out[path] = FilterTrajectory(grid=grid, values=values, spec_label="from_csv")
    return out


def bounds_from_trajectories(cfg: dict) -> str:
    """Recompute bound series from a stored trajectory CSV (bounds CLI).

    Config keys: q (matrix), trajectory_csv (path), bounds (subset of
    det|pathwise_simple|ode), and either initial_hilbert or mu+nu. For a
    misspecified-model drift supply qtilde plus h (htilde defaults to h).
    """
    q = validate_rate_matrix(cfg["q"])
    with open(cfg["trajectory_csv"], "r", encoding="utf-8") as fh:
        trajs = trajectories_from_csv(fh.read())
    if "initial_hilbert" in cfg:
        h0 = float(cfg["initial_hilbert"])
    else:
        h0 = hilbert_distance(
            np.asarray(cfg["mu"], dtype=float), np.asarray(cfg["nu"], dtype=float)
        )
    requested = tuple(cfg.get("bounds", ["det"]))
    lam = deterministic_rate(q)
    spec = None
    h = None
    if "qtilde" in cfg:
        qtilde = validate_rate_matrix(cfg["qtilde"])
        h = SensorVector(np.asarray(cfg["h"], dtype=float))
        htilde = SensorVector(np.asarray(cfg.get("htilde", cfg["h"]), dtype=float))
        spec = misspecified_wonham_spec(qtilde, htilde, float(cfg.get("sigma", 1.0)))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    run_id = str(cfg.get("label", "bounds"))
    for path in sorted(trajs):
        traj = trajs[path]
        grid = traj.grid
        n_t = grid.n_steps + 1
        if spec is not None:
            drift = combined_drift_error(error_terms(q, h, spec, traj))
        else:
            drift = np.zeros(n_t)
        out: dict[str, np.ndarray] = {}
        if "det" in requested:
            out["bound_det"] = exponential_bound(
                h0, np.full(n_t, lam), drift, grid,
                kind=BoundKind.DETERMINISTIC_EXP,
            ).values
        if "pathwise_simple" in requested:
            rates = pathwise_rate_simple_series(q, traj.values)
            out["bound_pathwise_simple"] = exponential_bound(
                h0, rates, drift, grid, kind=BoundKind.PATHWISE_EXP
            ).values
        if "ode" in requested:
            u = solve_bound_ode(q, traj, drift, float(np.tanh(h0 / 4.0)))
            out["bound_ode_tanh"] = u.values
            out["bound_ode"] = hilbert_scale(u).values
        times = grid.times
        for metric in sorted(out):
            for t, v in zip(times, out[metric]):
                w.writerow((run_id, path, _fmt(t), metric, _fmt(v)))
    return buf.getvalue()
