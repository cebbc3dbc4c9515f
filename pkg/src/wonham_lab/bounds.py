"""Contraction rates, error bounds, and the utilities that back them.

Four nested decay rates are provided, from cheapest to sharpest: the
deterministic rate from the rate matrix alone, a per-time pathwise rate
from the running filter, its exact subset-minimized refinement, and the
state-dependent coefficient that drives the comparison ODE. The module
also evaluates the three per-state error terms of a generic approximate
filter, assembles exponential and ODE error bounds from them, and houses
the smooth-max helpers and a local-time estimator used by the expected
error bound.
"""

from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .ctmc import EPS_FLOOR, RateMatrix, SensorVector, TimeGrid
from .errors import (
    DimensionMismatch,
    GridMismatch,
    NegativeRate,
    NonInteriorInput,
    SubsetFallbackWarning,
)
from .filtering import ApproximateFilterSpec, FilterTrajectory

SUBSET_EXACT_CAP = 15  # exact subset minimization up to this many states
ODE_CLAMP = 1.0 - 1e-12


class BoundKind(enum.Enum):
    DETERMINISTIC_EXP = "deterministic_exp"
    PATHWISE_EXP = "pathwise_exp"
    ODE_TANH = "ode_tanh"
    EXPECTED = "expected"
    ROBUSTNESS = "robustness"


class BoundScale(enum.Enum):
    HILBERT = "hilbert"
    TANH_QUARTER = "tanh_quarter"


@dataclass(frozen=True)
class BoundSeries:
    """Per-grid-time values of one error bound, tagged with its origin."""

    grid: TimeGrid
    values: np.ndarray
    kind: BoundKind
    scale: BoundScale

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.grid.n_steps + 1,):
            raise GridMismatch("bound series length does not match grid")
        if np.any(v < 0):
            raise ValueError("bound values must be nonnegative")
        if self.scale is BoundScale.TANH_QUARTER and np.any(v >= 1.0):
            raise ValueError("tanh-scale bound must stay below 1")
        v = v.copy()
        v.flags.writeable = False
        object.__setattr__(self, "values", v)


@dataclass(frozen=True)
class ErrorTermSeries:
    """Per-grid-time error terms of an approximate filter, one column per
    state: drift mismatch, squared-gain mismatch, gain mismatch."""

    grid: TimeGrid
    e1: np.ndarray
    e2: np.ndarray
    e3: np.ndarray

    def __post_init__(self):
        shape = (self.grid.n_steps + 1,)
        for name in ("e1", "e2", "e3"):
            a = np.asarray(getattr(self, name), dtype=float)
            if a.ndim != 2 or a.shape[0] != shape[0]:
                raise GridMismatch(f"{name} shape does not match grid")
            if not np.all(np.isfinite(a)):
                raise ValueError(f"{name} has non-finite entries")
            a = a.copy()
            a.flags.writeable = False
            object.__setattr__(self, name, a)


@dataclass(frozen=True)
class LocalTimeEstimate:
    """Occupation-time estimate of local time at level 0, cumulative in t."""

    grid: TimeGrid
    values: np.ndarray
    epsilon: float

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.grid.n_steps + 1,):
            raise GridMismatch("local time series length does not match grid")
        if np.any(np.diff(v) < 0) or v[0] != 0.0:
            raise ValueError("local time estimate must start at 0 and be nondecreasing")
        v = v.copy()
        v.flags.writeable = False
        object.__setattr__(self, "values", v)


# ---------------------------------------------------------------------------
# decay rates
# ---------------------------------------------------------------------------


def deterministic_rate(Q: RateMatrix) -> float:
    """2 min over i != j of sqrt(q_ij q_ji); zero if any off-diagonal is."""
    q = np.asarray(Q, dtype=float)
    n = q.shape[0]
    if n < 2:
        return 0.0
    off = ~np.eye(n, dtype=bool)
    products = (q * q.T)[off]
    return float(2.0 * np.sqrt(max(products.min(), 0.0)))


def _interior_rows(p: np.ndarray) -> np.ndarray:
    p = np.atleast_2d(np.asarray(p, dtype=float))
    if np.any(p < EPS_FLOOR):
        raise NonInteriorInput("rate evaluation requires interior vectors")
    return p


def _pair_mask(n: int) -> np.ndarray:
    # valid[j, i, k] is True when j differs from both i and k
    j, i, k = np.ogrid[:n, :n, :n]
    return (j != i) & (j != k)


def pathwise_rate_simple_series(Q: RateMatrix, probs) -> np.ndarray:
    """Pathwise decay rate per grid time, vectorized over rows of probs.

    Rate at a filter state p: 2 min over i != k of
    sqrt(q_ik q_ki + sum_{j != i,k} min(q_ji q_ik / p_k, q_jk q_ki / p_i) p_j).
    """
    q = np.asarray(Q, dtype=float)
    p = _interior_rows(probs)
    m, n = p.shape
    valid = _pair_mask(n)
    diag = np.eye(n, dtype=bool)
    out = np.empty(m)
    # chunk over time to keep the (chunk, n, n, n) tensors small
    chunk = max(1, int(2_000_000 // max(n**3, 1)))
    pair = q * q.T
    for lo in range(0, m, chunk):
        pc = p[lo : lo + chunk]
        b = q[None, :, :] / pc[:, None, :]  # b[t, i, k] = q_ik / p_k
        t1 = b[:, :, :, None] * q.T[None, :, None, :]  # (t,i,k,j): q_ji q_ik/p_k
        t2 = b.transpose(0, 2, 1)[:, :, :, None] * q.T[None, None, :, :]  # q_jk q_ki/p_i
        term = np.minimum(t1, t2) * pc[:, None, None, :]
        term *= valid.transpose(1, 2, 0)[None, :, :, :]
        radicand = pair[None, :, :] + term.sum(axis=3)
        radicand[:, diag] = np.inf
        out[lo : lo + chunk] = 2.0 * np.sqrt(radicand.reshape(pc.shape[0], -1).min(axis=1))
    return out


def pathwise_rate_simple(Q: RateMatrix, pitilde) -> float:
    """Pathwise decay rate at one filter state (see the series variant)."""
    return float(pathwise_rate_simple_series(Q, np.atleast_2d(np.asarray(pitilde)))[0])


def pathwise_rate_subset(Q: RateMatrix, pitilde, exact_cap: int = SUBSET_EXACT_CAP) -> float:
    """Subset-minimized pathwise rate, exact up to ``exact_cap`` states.

    For each ordered pair (i, k) the radicand minimized over subsets S
    factorizes as (q_ik + sum_{j not in S} q_jk p_j / p_i)
    * (q_ki + sum_{j in S} q_ji p_j / p_k), which is enumerated exactly.
    Above the cap the simple rate is returned and a
    ``SubsetFallbackWarning`` is emitted.
    """
    q = np.asarray(Q, dtype=float)
    p = _interior_rows(pitilde)[0]
    n = p.shape[0]
    if n < 2:
        return 0.0
    if n > exact_cap:
        warnings.warn(
            f"subset minimization capped at {exact_cap} states; using simple rate",
            SubsetFallbackWarning,
        )
        return pathwise_rate_simple(Q, pitilde)
    m = n - 2
    if m > 0:
        masks = (
            np.arange(2**m)[:, None] >> np.arange(m)[None, :]
        ) % 2 == 1  # (2^m, m) subset indicators
    best = np.inf
    for i in range(n):
        for k in range(n):
            if i == k:
                continue
            others = [j for j in range(n) if j != i and j != k]
            if not others:
                radicand = q[i, k] * q[k, i]
            else:
                a = q[others, i] * p[others] / p[k]  # S side, pairs with q_ki
                b = q[others, k] * p[others] / p[i]  # complement side, with q_ik
                radicand = float(
                    np.min((q[i, k] + (~masks) @ b) * (q[k, i] + masks @ a))
                )
            best = min(best, radicand)
    return float(2.0 * np.sqrt(max(best, 0.0)))


def state_dependent_rate(Q: RateMatrix, pitilde, u: float, mirror: bool = False) -> float:
    """State-dependent decay coefficient driving the comparison ODE.

    ``mirror=False`` evaluates the coefficient in terms of the observed
    approximate filter; ``mirror=True`` uses the exact filter instead
    (membership set and weights swap accordingly). Requires u in [0, 1).
    """
    if not 0.0 <= u < 1.0:
        raise ValueError("u must lie in [0, 1)")
    q = np.asarray(Q, dtype=float)
    p = _interior_rows(pitilde)[0]
    n = p.shape[0]
    if n < 2:
        return 0.0
    w_plus = (1.0 + u) / (1.0 - u)
    w_minus = 1.0 / w_plus
    scaled = q / p[None, :]  # scaled[j, i] = q_ji / p_i
    r = q * (p[:, None] / p[None, :])  # r[i, k] = q_ik p_i / p_k
    gi = scaled * p[:, None]  # gi[j, i] = q_ji p_j / p_i
    valid = _pair_mask(n)
    lhs = scaled[:, None, :]  # (j, 1, k): q_jk / p_k
    rhs = scaled[:, :, None]  # (j, i, 1): q_ji / p_i
    if not mirror:
        member = (lhs >= rhs * w_minus**2) & valid
        toward_i = (member * gi[:, :, None]).sum(axis=0)  # sum of q_ji p_j / p_i
        toward_k = ((~member & valid) * gi[:, None, :]).sum(axis=0)  # q_jk p_j / p_k
        vals = (r + toward_k) * w_plus + (r.T + toward_i) * w_minus
    else:
        member = (lhs <= rhs * w_plus**2) & valid
        toward_k = (member * gi[:, None, :]).sum(axis=0)
        toward_i = ((~member & valid) * gi[:, :, None]).sum(axis=0)
        vals = (r + toward_k) * w_minus + (r.T + toward_i) * w_plus
    np.fill_diagonal(vals, np.inf)
    return float(vals.min())


# ---------------------------------------------------------------------------
# error terms
# ---------------------------------------------------------------------------


def error_terms(
    Q: RateMatrix, h: SensorVector, spec: ApproximateFilterSpec, traj: FilterTrajectory
) -> ErrorTermSeries:
    """Evaluate the three per-state error terms along a trajectory.

    e1 = (Q^T p)_j / p_j - drift_j / p_j, e2 = h_j^2 - (gain_j / p_j)^2,
    e3 = h_j - gain_j / p_j, at every grid time.
    """
    q = np.asarray(Q, dtype=float)
    hv = np.asarray(h, dtype=float)
    p = traj.values
    if np.any(p < EPS_FLOOR):
        raise NonInteriorInput("error terms require an interior trajectory")
    if q.shape[0] != p.shape[1] or hv.shape[0] != p.shape[1]:
        raise DimensionMismatch("model dimensions do not match trajectory")
    times = traj.grid.times
    if (
        spec.drift_batch is not None
        and spec.gain_batch is not None
        and not spec.time_dependent
    ):
        # time-independent coefficients evaluate the whole path in one call
        drift_vals = spec.drift_batch(times[0], p)
        gain_vals = spec.gain_batch(times[0], p)
    else:
        drift_vals = np.empty_like(p)
        gain_vals = np.empty_like(p)
        for k in range(p.shape[0]):
            drift_vals[k] = spec.drift(times[k], p[k])
            gain_vals[k] = spec.gain(times[k], p[k])
    e1 = (p @ q) / p - drift_vals / p
    ratio = gain_vals / p
    e2 = hv[None, :] ** 2 - ratio**2
    e3 = hv[None, :] - ratio
    return ErrorTermSeries(grid=traj.grid, e1=e1, e2=e2, e3=e3)


def combined_drift_error(terms: ErrorTermSeries) -> np.ndarray:
    """max over ordered pairs (i, k) of e1_i - e1_k - (e2_i - e2_k)/2,
    per grid time (the diagonal contributes 0, so the max is >= 0)."""
    a = terms.e1 - 0.5 * terms.e2
    return a.max(axis=1) - a.min(axis=1)


def e3_spread(terms: ErrorTermSeries) -> np.ndarray:
    """max over ordered pairs of e3_i - e3_k, per grid time."""
    return terms.e3.max(axis=1) - terms.e3.min(axis=1)


# ---------------------------------------------------------------------------
# bound assembly
# ---------------------------------------------------------------------------


def _discounted_accumulate(
    x0: float, rates: np.ndarray, drift: np.ndarray, dt: float
) -> np.ndarray:
    """x0 e^{-R_t} + int_0^t e^{-(R_t - R_s)} drift_s ds by trapezoid, via a
    decay recursion so no exponential ever overflows."""
    n = rates.shape[0]
    out = np.empty(n)
    out[0] = x0
    decay_steps = np.exp(-0.5 * dt * (rates[:-1] + rates[1:]))
    head = x0
    tail = 0.0
    for k in range(n - 1):
        d = decay_steps[k]
        head *= d
        tail = d * tail + 0.5 * dt * (d * drift[k] + drift[k + 1])
        out[k + 1] = head + tail
    return out


def discounted_accumulate_batch(
    x0: np.ndarray, rates: np.ndarray, drift: np.ndarray, dt: float
) -> np.ndarray:
    """Row-wise version of the bound recursion: x0, rates, drift stacked
    along the first axis; returns the same stacking."""
    n = rates.shape[1]
    out = np.empty_like(rates)
    head = np.array(x0, dtype=float)
    out[:, 0] = head
    tail = np.zeros_like(head)
    decay = np.exp(-0.5 * dt * (rates[:, :-1] + rates[:, 1:]))
    for k in range(n - 1):
        d = decay[:, k]
        head = head * d
        tail = d * tail + 0.5 * dt * (d * drift[:, k] + drift[:, k + 1])
        out[:, k + 1] = head + tail
    return out


def exponential_bound(
    initial_h: float,
    rate_series,
    drift_error,
    grid: TimeGrid,
    scale: BoundScale = BoundScale.HILBERT,
    kind: BoundKind | None = None,
) -> BoundSeries:
    """Exponential error bound from a decay-rate series and a drift series.

    Hilbert scale: H0 e^{-int rate} + int e^{-int rate} drift ds.
    Tanh scale: tanh(H0/4) e^{-int rate} + (1/4) int e^{-int rate} drift ds.
    Integration is trapezoidal (exact for constant rates).
    """
    rates = np.asarray(rate_series, dtype=float)
    if np.any(rates < 0):
        raise NegativeRate("rate series must be nonnegative")
    if rates.shape != (grid.n_steps + 1,):
        raise GridMismatch("rate series length does not match grid")
    if drift_error is None:
        drift = np.zeros_like(rates)
    else:
        drift = np.asarray(drift_error, dtype=float)
        if drift.shape != rates.shape:
            raise GridMismatch("drift series length does not match grid")
    if scale is BoundScale.HILBERT:
        x0, factor = float(initial_h), 1.0
    else:
        x0, factor = float(np.tanh(initial_h / 4.0)), 0.25
    values = _discounted_accumulate(x0, rates, factor * drift, grid.dt)
    if scale is BoundScale.TANH_QUARTER:
        values = np.minimum(values, ODE_CLAMP)
    if kind is None:
        kind = (
            BoundKind.DETERMINISTIC_EXP
            if np.all(rates == rates[0])
            else BoundKind.PATHWISE_EXP
        )
    return BoundSeries(grid=grid, values=values, kind=kind, scale=scale)


def tamed_euler(
    f: Callable[[float, float], float],
    u0: float,
    grid: TimeGrid,
    clamp: tuple[float, float] = (0.0, ODE_CLAMP),
) -> np.ndarray:
    """Explicit one-step scheme u += dt f / (1 + dt |f|), clamped.

    The taming denominator uses the full right side, which prevents
    blow-up under locally Lipschitz coefficients.
    """
    times = grid.times
    dt = grid.dt
    lo, hi = clamp
    u = np.empty(grid.n_steps + 1)
    u[0] = min(max(u0, lo), hi)
    x = u[0]
    for k in range(grid.n_steps):
        fk = f(times[k], x)
        x += dt * fk / (1.0 + dt * abs(fk))
        x = min(max(x, lo), hi)
        u[k + 1] = x
    return u


def solve_bound_ode(
    Q: RateMatrix,
    pitilde_traj: FilterTrajectory,
    drift_error,
    u0: float,
    mirror: bool = False,
) -> BoundSeries:
    """Tamed-Euler solution of the tanh-scale comparison ODE
    du/dt = -rate(t, u) u + (1/4) drift_t (1 - u^2), u_0 given in [0, 1).

    The Hilbert-scale bound is 4 artanh(u_t) (see hilbert_scale).
    """
    if not 0.0 <= u0 < 1.0:
        raise ValueError("u0 must lie in [0, 1)")
    values = pitilde_traj.values
    dt = pitilde_traj.grid.dt
    if drift_error is None:
        drift = np.zeros(values.shape[0])
    else:
        drift = np.asarray(drift_error, dtype=float)
        if drift.shape != (values.shape[0],):
            raise GridMismatch("drift series length does not match trajectory")
    u = np.empty(values.shape[0])
    u[0] = u0
    x = u0
    for k in range(values.shape[0] - 1):
        rate = state_dependent_rate(Q, values[k], x, mirror=mirror)
        fk = -rate * x + 0.25 * drift[k] * (1.0 - x * x)
        x += dt * fk / (1.0 + dt * abs(fk))
        x = min(max(x, 0.0), ODE_CLAMP)
        u[k + 1] = x
    return BoundSeries(
        grid=pitilde_traj.grid,
        values=u,
        kind=BoundKind.ODE_TANH,
        scale=BoundScale.TANH_QUARTER,
    )


def state_dependent_rate_batch(
    Q: RateMatrix, probs: np.ndarray, u: np.ndarray, mirror: bool = False
) -> np.ndarray:
    """Vectorized state-dependent rate over rows of probs and entries of u.

    Agrees with ``state_dependent_rate`` row by row; used by the batched
    comparison-ODE driver.
    """
    q = np.asarray(Q, dtype=float)
    p = np.asarray(probs, dtype=float)
    uv = np.asarray(u, dtype=float)
    m, n = p.shape
    if n < 2:
        return np.zeros(m)
    w_plus = (1.0 + uv) / (1.0 - uv)  # (m,)
    w_minus = 1.0 / w_plus
    scaled = q[None, :, :] / p[:, None, :]  # (m, j, i) = q_ji / p_i
    r = q[None, :, :] * (p[:, :, None] / p[:, None, :])  # (m, i, k)
    gi = scaled * p[:, :, None]  # (m, j, i) = q_ji p_j / p_i
    valid = _pair_mask(n)[None, :, :, :]  # (1, j, i, k)
    lhs = scaled[:, :, None, :]  # (m, j, 1, k)
    rhs = scaled[:, :, :, None]  # (m, j, i, 1)
    if not mirror:
        member = (lhs >= rhs * (w_minus**2)[:, None, None, None]) & valid
        toward_i = (member * gi[:, :, :, None]).sum(axis=1)
        toward_k = ((~member & valid) * gi[:, :, None, :]).sum(axis=1)
        vals = (r + toward_k) * w_plus[:, None, None] + (
            r.transpose(0, 2, 1) + toward_i
        ) * w_minus[:, None, None]
    else:
        member = (lhs <= rhs * (w_plus**2)[:, None, None, None]) & valid
        toward_k = (member * gi[:, :, None, :]).sum(axis=1)
        toward_i = ((~member & valid) * gi[:, :, :, None]).sum(axis=1)
        vals = (r + toward_k) * w_minus[:, None, None] + (
            r.transpose(0, 2, 1) + toward_i
        ) * w_plus[:, None, None]
    diag = np.eye(n, dtype=bool)
    vals[:, diag] = np.inf
    return vals.reshape(m, -1).min(axis=1)


def solve_bound_ode_batch(
    Q: RateMatrix,
    traj_values: np.ndarray,
    drift_error: np.ndarray,
    u0: np.ndarray,
    dt: float,
    mirror: bool = False,
) -> np.ndarray:
    """Tamed-Euler comparison ODE for many paths at once.

    ``traj_values`` has shape (n_paths, n_t, n_states), ``drift_error``
    (n_paths, n_t), ``u0`` (n_paths,); returns u of shape (n_paths, n_t).
    Stepping matches ``solve_bound_ode`` path by path.
    """
    n_paths, n_t, _ = traj_values.shape
    u = np.empty((n_paths, n_t))
    x = np.clip(np.asarray(u0, dtype=float), 0.0, ODE_CLAMP)
    u[:, 0] = x
    for k in range(n_t - 1):
        rate = state_dependent_rate_batch(Q, traj_values[:, k], x, mirror=mirror)
        fk = -rate * x + 0.25 * drift_error[:, k] * (1.0 - x * x)
        x = x + dt * fk / (1.0 + dt * np.abs(fk))
        x = np.clip(x, 0.0, ODE_CLAMP)
        u[:, k + 1] = x
    return u


def hilbert_scale(series: BoundSeries) -> BoundSeries:
    """Convert a tanh-scale bound to the Hilbert scale via 4 artanh."""
    if series.scale is BoundScale.HILBERT:
        return series
    return BoundSeries(
        grid=series.grid,
        values=4.0 * np.arctanh(series.values),
        kind=series.kind,
        scale=BoundScale.HILBERT,
    )


@dataclass(frozen=True)
class ComparisonReport:
    ok: bool
    first_violation: int | None = None
    worst_excess: float = 0.0


def comparison_check(x_series, u_series, tol: float = 0.05) -> ComparisonReport:
    """Check x_k <= u_k (1 + tol) at every index; report the first failure."""
    x = np.asarray(x_series, dtype=float)
    if isinstance(u_series, BoundSeries):
        u = u_series.values
    else:
        u = np.asarray(u_series, dtype=float)
    if x.shape != u.shape:
        raise GridMismatch("series lengths differ")
    excess = x - u * (1.0 + tol)
    bad = np.nonzero(excess > 0)[0]
    if bad.size == 0:
        return ComparisonReport(ok=True)
    return ComparisonReport(ok=False, first_violation=int(bad[0]), worst_excess=float(excess.max()))


def robustness_constants(
    Q: RateMatrix, Qtilde: RateMatrix, h: SensorVector, htilde: SensorVector
) -> tuple[float, float, float]:
    """Constants (K_q, K_h, lambda) of the misspecified-model error bound:
    K_q = 2 max |q~ - q|, K_h = 2 max|h| max|h - h~| + max|h^2 - h~^2|."""
    q = np.asarray(Q, dtype=float)
    qt = np.asarray(Qtilde, dtype=float)
    hv = np.asarray(h, dtype=float)
    ht = np.asarray(htilde, dtype=float)
    if q.shape != qt.shape or hv.shape != ht.shape or q.shape[0] != hv.shape[0]:
        raise DimensionMismatch("model dimensions differ")
    k_q = 2.0 * float(np.abs(qt - q).max())
    k_h = 2.0 * float(np.abs(hv).max()) * float(np.abs(hv - ht).max()) + float(
        np.abs(hv**2 - ht**2).max()
    )
    return k_q, k_h, deterministic_rate(Q)


def expected_error_bound(
    lam: float,
    initial_h: float,
    drift_error_expect,
    e3_expect,
    hmax: float,
    grid: TimeGrid,
    local_time_terms=None,
) -> BoundSeries:
    """Expected-error bound: H0 e^{-lam t} + int e^{-lam(t-s)} E[drift] ds
    + max|h| int e^{-lam(t-s)} E[e3 spread] ds + (1/4) local-time terms.

    Expectations are Monte Carlo sample means supplied by the caller; the
    optional local-time series is already summed over index pairs.
    """
    if lam < 0:
        raise NegativeRate("decay rate must be nonnegative")
    n = grid.n_steps + 1
    drift = np.asarray(drift_error_expect, dtype=float)
    e3 = np.asarray(e3_expect, dtype=float)
    if drift.shape != (n,) or e3.shape != (n,):
        raise GridMismatch("expectation series lengths do not match grid")
    rates = np.full(n, float(lam))
    base = _discounted_accumulate(float(initial_h), rates, drift, grid.dt)
    extra = _discounted_accumulate(0.0, rates, hmax * e3, grid.dt)
    values = base + extra
    if local_time_terms is not None:
        lt = np.asarray(local_time_terms, dtype=float)
        if lt.shape != (n,):
            raise GridMismatch("local-time series length does not match grid")
        values = values + 0.25 * lt
    return BoundSeries(grid=grid, values=values, kind=BoundKind.EXPECTED, scale=BoundScale.HILBERT)


# ---------------------------------------------------------------------------
# smooth max and local times
# ---------------------------------------------------------------------------


def lse_alpha(x, alpha: float) -> float:
    """(1/alpha) log sum exp(alpha x_i), max-subtracted for overflow safety."""
    v = np.asarray(x, dtype=float)
    m = float(v.max())
    return m + float(np.log(np.exp(alpha * (v - m)).sum())) / alpha


def softargmax_alpha(x, c, alpha: float) -> float:
    """sum c_i exp(alpha x_i) / sum exp(alpha x_i), max-subtracted."""
    v = np.asarray(x, dtype=float)
    w = np.exp(alpha * (v - v.max()))
    return float((np.asarray(c, dtype=float) * w).sum() / w.sum())


def estimate_local_time(series, grid: TimeGrid, epsilon: float) -> LocalTimeEstimate:
    """Discretized occupation estimator of local time at level 0:
    (1/2 eps) sum over steps of 1{|Z| < eps} (dZ)^2, cumulative in t."""
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    z = np.asarray(series, dtype=float)
    if z.shape != (grid.n_steps + 1,):
        raise GridMismatch("series length does not match grid")
    dz = np.diff(z)
    contrib = (np.abs(z[:-1]) < epsilon) * dz**2 / (2.0 * epsilon)
    values = np.concatenate(([0.0], np.cumsum(contrib)))
    return LocalTimeEstimate(grid=grid, values=values, epsilon=float(epsilon))


def discounted_local_time_integral(
    series, grid: TimeGrid, epsilon: float, lam: float
) -> np.ndarray:
    """Per-grid-time estimate of int_0^t e^{-lam (t-s)} dL^0_s for one
    difference process, using the same occupation estimator."""
    z = np.asarray(series, dtype=float)
    if z.shape != (grid.n_steps + 1,):
        raise GridMismatch("series length does not match grid")
    dz = np.diff(z)
    contrib = (np.abs(z[:-1]) < epsilon) * dz**2 / (2.0 * epsilon)
    decay = np.exp(-lam * grid.dt)
    out = np.empty(grid.n_steps + 1)
    out[0] = 0.0
    acc = 0.0
    for k in range(grid.n_steps):
        acc = decay * (acc + contrib[k])
        out[k + 1] = acc
    return out
