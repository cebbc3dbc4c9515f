"""Acceptance suite: one check per criterion, each returning a result record.

The checks pin every tolerance stated in the package contract; the pytest
suite and the ``wonham-lab selftest`` command both run these functions, so
an installed copy can verify itself. Scenario runs are cached per preset
within the process since several criteria share them.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .bounds import (
    combined_drift_error,
    deterministic_rate,
    e3_spread,
    error_terms,
    estimate_local_time,
    lse_alpha,
    pathwise_rate_simple,
    pathwise_rate_subset,
    state_dependent_rate,
    tamed_euler,
)
from .ctmc import (
    SensorVector,
    SimplexVector,
    TimeGrid,
    cyclic_rate_matrix,
    sample_ctmc_path,
    stationary_distribution,
    validate_rate_matrix,
)
from .experiments import figure_config, parse_config, run_scenario
from .filtering import exact_wonham_spec, integrate_generic, simulate_observations
from .hilbert import hilbert_distance

THREE_STATE_Q = [[-3.0, 1.0, 2.0], [1.0, -3.0, 2.0], [1.5, 1.5, -3.0]]


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    detail: str
    seconds: float

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return f"[{tag}] criterion {self.number:2d} ({self.name}): {self.detail} [{self.seconds:.2f}s]"


@lru_cache(maxsize=None)
def _run_preset(which: str):
    return run_scenario(parse_config(figure_config(which)))


def _timed(fn, repeats: int = 5) -> tuple[float, object]:
    fn()  # warm up
    best = float("inf")
    out = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def criterion_01() -> CriterionResult:
    """Stationary law of the 3-state benchmark equals (0.3, 0.3, 0.4)."""
    t0 = time.perf_counter()
    q = validate_rate_matrix(THREE_STATE_Q)
    solve_time, pi = _timed(lambda: stationary_distribution(q))
    err = float(np.abs(np.asarray(pi) - np.array([0.3, 0.3, 0.4])).max())
    passed = err <= 1e-10 and solve_time < 1e-3
    detail = f"max error {err:.2e} (tol 1e-10), solve {solve_time * 1e6:.0f}us (< 1ms)"
    return CriterionResult(1, "stationary fixture", passed, detail, time.perf_counter() - t0)


def criterion_02() -> CriterionResult:
    """Deterministic rate of the cyclic benchmark is exactly 2 for all n."""
    t0 = time.perf_counter()
    worst_time = 0.0
    exact = True
    for n in (2, 20, 50, 100):
        q = cyclic_rate_matrix(n)
        solve_time, lam = _timed(lambda q=q: deterministic_rate(q))
        worst_time = max(worst_time, solve_time)
        exact = exact and (lam == 2.0)
    passed = exact and worst_time < 1e-3
    detail = f"rate == 2.0 exactly: {exact}, slowest call {worst_time * 1e6:.0f}us (< 1ms)"
    return CriterionResult(2, "rate fixture", passed, detail, time.perf_counter() - t0)


def criterion_03() -> CriterionResult:
    """Two-state stability: pathwise contraction bounds, then sharpness."""
    t0 = time.perf_counter()
    res = _run_preset("fig1")
    times = res.grid.times
    h0 = res.initial_hilbert
    det_h = h0 * np.exp(-2.0 * times)
    det_tanh = np.tanh(h0 / 4.0) * np.exp(-2.0 * times)
    viol_h = int((res.series["h_error"] > det_h[None, :] * 1.05).sum())
    viol_tanh = int((res.series["tanh_error"] > det_tanh[None, :] * 1.05).sum())
    mask = times >= 3.0
    ratio = float((res.series["h_error"][:, mask] / det_h[None, mask]).max())
    elapsed = time.perf_counter() - t0
    sharp_ok = ratio >= 0.8
    passed = viol_h == 0 and viol_tanh == 0 and sharp_ok and elapsed < 60.0
    detail = (
        f"violations h={viol_h} tanh={viol_tanh} (need 0); "
        f"sharpness max ratio t>=3 is {ratio:.3f} (need >= 0.8)"
        f"{'' if sharp_ok else ' -- unattainable at stated SNR, see decisions ledger'}; "
        f"runtime {elapsed:.1f}s (< 60s)"
    )
    return CriterionResult(3, "two-state contraction", passed, detail, elapsed)


def criterion_04() -> CriterionResult:
    """Rate chain lambda <= simple <= subset <= state-dependent(u)."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(90401)
    slack = 1e-9
    violations = 0
    for _ in range(1000):
        n = int(rng.integers(2, 7))
        q = rng.uniform(0.05, 4.0, size=(n, n))
        np.fill_diagonal(q, 0.0)
        np.fill_diagonal(q, -q.sum(axis=1))
        Q = validate_rate_matrix(q)
        p = rng.dirichlet(np.ones(n)) * 0.9 + 0.1 / n
        p = SimplexVector(p / p.sum())
        lam = deterministic_rate(Q)
        simple = pathwise_rate_simple(Q, p)
        subset = pathwise_rate_subset(Q, p)
        ok = lam <= simple * (1 + slack) and simple <= subset * (1 + slack)
        for u in rng.uniform(0.0, 0.999, size=10):
            ok = ok and subset <= state_dependent_rate(Q, p, float(u)) * (1 + slack)
        violations += 0 if ok else 1
    passed = violations == 0
    detail = f"{violations} violations over 1000 models x 10 u-samples (exact subset enumeration)"
    return CriterionResult(4, "rate chain", passed, detail, time.perf_counter() - t0)


def criterion_05() -> CriterionResult:
    """n=20 stability: ODE <= pathwise <= deterministic, error below each."""
    t0 = time.perf_counter()
    res = _run_preset("fig2:20")
    err = res.series["h_error"]
    ode = res.series["bound_ode"]
    pw = res.series["bound_pathwise_simple"]
    det = res.series["bound_det"]
    chain1 = int((ode > pw * 1.05).sum())
    chain2 = int((pw > det * 1.05).sum())
    below = int((err > ode * 1.05).sum() + (err > pw * 1.05).sum() + (err > det * 1.05).sum())
    elapsed = time.perf_counter() - t0
    passed = chain1 == 0 and chain2 == 0 and below == 0 and elapsed < 300.0
    detail = (
        f"chain violations ode<=pw {chain1}, pw<=det {chain2}, error-below {below} "
        f"(all need 0); runtime {elapsed:.1f}s (< 5min)"
    )
    return CriterionResult(5, "bound ordering n=20", passed, detail, elapsed)


def criterion_06() -> CriterionResult:
    """Exact filter through the error terms: combined drift and gain spread
    vanish to 1e-8 on 10 random models."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(90406)
    worst = 0.0
    for _ in range(10):
        n = int(rng.integers(2, 6))
        q = rng.uniform(0.2, 3.0, size=(n, n))
        np.fill_diagonal(q, 0.0)
        np.fill_diagonal(q, -q.sum(axis=1))
        Q = validate_rate_matrix(q)
        h = SensorVector(rng.uniform(-2.0, 2.0, size=n))
        init = SimplexVector(rng.dirichlet(np.ones(n)) * 0.8 + 0.2 / n)
        grid = TimeGrid(dt=1e-3, n_steps=500)
        path = sample_ctmc_path(Q, init, grid.end, rng)
        obs = simulate_observations(path, h, 1.0, grid, rng)
        spec = exact_wonham_spec(Q, h)
        traj = integrate_generic(spec, obs, init)
        terms = error_terms(Q, h, spec, traj)
        worst = max(worst, float(combined_drift_error(terms).max()), float(e3_spread(terms).max()))
    passed = worst <= 1e-8
    detail = f"worst combined-drift / gain-spread residual {worst:.2e} (tol 1e-8)"
    return CriterionResult(6, "exact-filter null test", passed, detail, time.perf_counter() - t0)


def criterion_07() -> CriterionResult:
    """Misspecified-Q algebraic identity along the 3-state fixture run."""
    t0 = time.perf_counter()
    res = _run_preset("fig4:3")
    cfg = res.config
    from .filtering import FilterTrajectory, misspecified_wonham_spec

    spec = misspecified_wonham_spec(cfg.qtilde, cfg.htilde, cfg.sigma)
    dq = np.asarray(cfg.q) - np.asarray(cfg.qtilde)
    worst = 0.0
    for p in range(cfg.n_paths):
        values = res.pitilde_values[p]
        traj = FilterTrajectory(grid=res.grid, values=values, spec_label="check")
        lhs = combined_drift_error(error_terms(cfg.q, cfg.h, spec, traj))
        d = (values @ dq) / values
        rhs = d.max(axis=1) - d.min(axis=1)
        worst = max(worst, float(np.abs(lhs - rhs).max()))
    passed = worst <= 1e-9
    detail = f"max |combined drift - rate-mismatch form| = {worst:.2e} (tol 1e-9)"
    return CriterionResult(7, "misspecified-Q identity", passed, detail, time.perf_counter() - t0)


def criterion_08() -> CriterionResult:
    """Approximation bounds on the 3- and 6-state fixtures: ordered chain,
    zero violations, and the ODE bound is the informative one."""
    t0 = time.perf_counter()
    details = []
    passed = True
    for which in ("fig4:3", "fig4:6"):
        res = _run_preset(which)
        err = res.series["h_error"]
        ode = res.series["bound_ode"]
        pw = res.series["bound_pathwise_simple"]
        det = res.series["bound_det"]
        bad = (
            int((err > ode * 1.05).sum())
            + int((ode > pw * 1.05).sum())
            + int((pw > det * 1.05).sum())
        )
        med_ode = float(np.median(ode[:, -1] - err[:, -1]))
        med_det = float(np.median(det[:, -1] - err[:, -1]))
        informative = med_ode < med_det
        passed = passed and bad == 0 and informative
        details.append(
            f"{which}: chain violations {bad}, median gaps ode {med_ode:.3f} < det {med_det:.3f}: {informative}"
        )
    elapsed = time.perf_counter() - t0
    passed = passed and elapsed < 300.0
    detail = "; ".join(details) + f"; runtime {elapsed:.1f}s (< 5min)"
    return CriterionResult(8, "approximation bounds", passed, detail, elapsed)


def criterion_09() -> CriterionResult:
    """Tamed Euler at dt=1e-3 matches an RK4 reference at dt=1e-5."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(90409)
    m = 20
    a0 = rng.uniform(0.3, 1.8, m)
    a1 = rng.uniform(0.0, 0.3, m) * a0
    om = rng.uniform(0.5, 6.0, m)
    ph = rng.uniform(0.0, 2 * np.pi, m)
    a2 = rng.uniform(0.0, 0.5, m)
    c0 = rng.uniform(0.0, 0.25, m)
    c1 = rng.uniform(0.0, 1.0, m) * c0
    om2 = rng.uniform(0.5, 6.0, m)
    u0 = rng.uniform(0.05, 0.4, m)

    def f_vec(t, u):
        rate = a0 + a1 * np.sin(om * t + ph) + a2 * u
        drift = c0 + c1 * np.cos(om2 * t)
        return -rate * u + 0.25 * drift * (1.0 - u * u)

    grid = TimeGrid(dt=1e-3, n_steps=1000)
    sup = 0.0
    # fourth-order reference at dt=1e-5, all instances advanced together,
    # recording the value at every coarse grid point
    ref_checkpoints = np.empty((m, grid.n_steps + 1))
    u = np.array(u0)
    ref_checkpoints[:, 0] = u
    h = 1e-5
    sub = int(round(grid.dt / h))
    for k in range(grid.n_steps):
        t = k * grid.dt
        for s in range(sub):
            ts = t + s * h
            k1 = f_vec(ts, u)
            k2 = f_vec(ts + h / 2, u + h / 2 * k1)
            k3 = f_vec(ts + h / 2, u + h / 2 * k2)
            k4 = f_vec(ts + h, u + h * k3)
            u = u + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
        ref_checkpoints[:, k + 1] = u
    for i in range(m):
        def f_scalar(t, x, i=i):
            rate = a0[i] + a1[i] * np.sin(om[i] * t + ph[i]) + a2[i] * x
            drift = c0[i] + c1[i] * np.cos(om2[i] * t)
            return -rate * x + 0.25 * drift * (1.0 - x * x)

        coarse = tamed_euler(f_scalar, float(u0[i]), grid)
        sup = max(sup, float(np.abs(coarse - ref_checkpoints[i]).max()))
    passed = sup <= 1e-3
    detail = f"sup-norm against RK4(dt=1e-5) over 20 instances: {sup:.2e} (tol 1e-3)"
    return CriterionResult(9, "ODE solver oracle", passed, detail, time.perf_counter() - t0)


def criterion_10() -> CriterionResult:
    """Local-time estimator on 1e4 Brownian paths hits E|B_1| = sqrt(2/pi)."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(90410)
    n_paths, dt, eps = 10_000, 1e-4, 0.05
    grid = TimeGrid(dt=dt, n_steps=int(round(1.0 / dt)))
    target = float(np.sqrt(2.0 / np.pi))
    total = 0.0
    batch = 500
    for _ in range(n_paths // batch):
        incr = np.sqrt(dt) * rng.standard_normal((batch, grid.n_steps))
        paths = np.concatenate([np.zeros((batch, 1)), np.cumsum(incr, axis=1)], axis=1)
        for b in range(batch):
            total += estimate_local_time(paths[b], grid, eps).values[-1]
    mean = total / n_paths
    rel = abs(mean - target) / target
    passed = rel <= 0.05
    detail = f"mean local time {mean:.4f} vs sqrt(2/pi)={target:.4f}, rel err {rel:.3%} (tol 5%)"
    return CriterionResult(10, "local-time estimator", passed, detail, time.perf_counter() - t0)


def criterion_11() -> CriterionResult:
    """max x <= lse_alpha(x) <= max x + log(n+1)/alpha, exactly."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(90411)
    violations = 0
    for _ in range(10_000):
        n = int(rng.integers(2, 11))
        x = rng.uniform(-50.0, 50.0, size=n)
        m = float(x.max())
        for alpha in (1.0, 10.0, 100.0):
            v = lse_alpha(x, alpha)
            if not (m <= v <= m + np.log(n) / alpha):
                violations += 1
    passed = violations == 0
    detail = f"{violations} violations over 1e4 vectors x alpha in {{1,10,100}}"
    return CriterionResult(11, "smooth-max suite", passed, detail, time.perf_counter() - t0)


def criterion_12() -> CriterionResult:
    """Hilbert metric axioms and interior continuity on 1e4 random pairs."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(90412)
    fixture = abs(hilbert_distance([0.5, 0.5], [0.4, 0.6]) - np.log(1.5))
    bad = 0
    for _ in range(10_000):
        n = int(rng.integers(2, 9))
        mu = rng.dirichlet(np.ones(n)) * 0.9 + 0.1 / n
        nu = rng.dirichlet(np.ones(n)) * 0.9 + 0.1 / n
        rho = rng.dirichlet(np.ones(n)) * 0.9 + 0.1 / n
        mu, nu, rho = mu / mu.sum(), nu / nu.sum(), rho / rho.sum()
        h_mn = hilbert_distance(mu, nu)
        ok = h_mn >= 0.0
        ok = ok and abs(h_mn - hilbert_distance(nu, mu)) <= 1e-12 * (1 + h_mn)
        ok = ok and hilbert_distance(mu, mu) == 0.0
        ok = ok and hilbert_distance(mu, rho) <= h_mn + hilbert_distance(nu, rho) + 1e-9
        c = float(rng.uniform(1e-3, 1e3))
        scaled = c * mu
        ok = ok and abs(hilbert_distance(scaled / scaled.sum(), nu) - h_mn) <= 1e-9
        floor = min(mu.min(), nu.min())
        for delta in (1e-2, 1e-4, 1e-6, 1e-8):
            bump = delta * rng.choice([-1.0, 1.0], size=n)
            mu_m = np.clip(mu + bump, 1e-9, None)
            nu_m = np.clip(nu - bump, 1e-9, None)
            h_m = hilbert_distance(mu_m / mu_m.sum(), nu_m / nu_m.sum())
            ok = ok and abs(h_m - h_mn) <= 8.0 * delta / floor + 1e-12
        bad += 0 if ok else 1
    passed = bad == 0 and fixture <= 1e-12
    detail = f"{bad} axiom/continuity violations; fixture |H - log 1.5| = {fixture:.1e} (tol 1e-12)"
    return CriterionResult(12, "Hilbert metric suite", passed, detail, time.perf_counter() - t0)


ALL_CRITERIA = [
    criterion_01,
    criterion_02,
    criterion_03,
    criterion_04,
    criterion_05,
    criterion_06,
    criterion_07,
    criterion_08,
    criterion_09,
    criterion_10,
    criterion_11,
    criterion_12,
]


def run_all() -> list[CriterionResult]:
    return [fn() for fn in ALL_CRITERIA]
