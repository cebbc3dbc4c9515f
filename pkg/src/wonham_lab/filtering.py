"""Observation synthesis and filter integration on a shared time grid.

Observation increments integrate the sensor drift exactly over each grid
cell from the jump skeleton (the integrand is piecewise constant), plus
Gaussian noise. Filters are integrated by explicit Euler steps with a
floor-and-renormalize projection after every step, so trajectories stay
interior and the log-ratio charts stay finite.
"""

from __future__ import annotations

import hashlib
import logging
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .ctmc import (
    EPS_FLOOR,
    CtmcPath,
    RateMatrix,
    SensorVector,
    SimplexVector,
    TimeGrid,
)
from .errors import DimensionMismatch, GridExceedsPath, NonFiniteState

log = logging.getLogger(__name__)

DriftFn = Callable[[float, np.ndarray], np.ndarray]
GainFn = Callable[[float, np.ndarray], np.ndarray]
BatchFn = Callable[[float, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class ObservationIncrements:
    """Per-cell increments of the observation process on a grid."""

    grid: TimeGrid
    dY: np.ndarray
    sigma: float

    def __post_init__(self):
        d = np.asarray(self.dY, dtype=float)
        if d.shape != (self.grid.n_steps,):
            raise ValueError("need one increment per grid cell")
        if not np.all(np.isfinite(d)):
            raise ValueError("non-finite observation increment")
        if self.sigma < 0:
            raise ValueError("sigma must be nonnegative")
        d = d.copy()
        d.flags.writeable = False
        object.__setattr__(self, "dY", d)

    def checksum(self) -> str:
        """Stable digest used to assert the same-observation discipline."""
        return hashlib.sha256(self.dY.tobytes()).hexdigest()


@dataclass(frozen=True)
class ApproximateFilterSpec:
    """Coefficients of a generic filter d pi = drift dt + gain dY.

    Both callables take (t, pi) with pi a plain array and must be pure;
    that is the contract that makes parallel path evaluation safe. The
    optional batch variants take (t, P) with P of shape (m, n_states) and
    return the same shape; they let the harness evaluate many paths (or
    many grid times) in one call and must agree with the scalar pair.
    """

    drift: DriftFn
    gain: GainFn
    label: str
    drift_batch: BatchFn | None = None
    gain_batch: BatchFn | None = None
    time_dependent: bool = False


@dataclass(frozen=True)
class FilterTrajectory:
    """Grid-sampled simplex path of one filter.

    ``values`` has shape (n_steps + 1, n_states); every row is on the
    simplex and at or above the interior floor. ``projection_l1`` records
    the per-step l1 magnitude of the post-step projection and
    ``floor_activations`` the number of entries the floor lifted, so heavy
    flooring is visible.
    """

    grid: TimeGrid
    values: np.ndarray
    spec_label: str
    projection_l1: np.ndarray | None = None
    floor_activations: int = 0

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 2 or v.shape[0] != self.grid.n_steps + 1:
            raise ValueError("trajectory shape does not match grid")
        if not np.all(np.isfinite(v)):
            raise ValueError("non-finite trajectory values")
        if np.any(np.abs(v.sum(axis=1) - 1.0) > 1e-10) or np.any(v < 0):
            raise ValueError("trajectory leaves the simplex")
        v = v.copy()
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @property
    def n_states(self) -> int:
        return self.values.shape[1]

    def state(self, k: int) -> SimplexVector:
        return SimplexVector(self.values[k])

    def __len__(self) -> int:
        return self.values.shape[0]


def _project(v: np.ndarray) -> tuple[np.ndarray, float, int]:
    """Floor-and-renormalize projection onto the interior simplex.

    Returns (projected, l1 change, floor activations). The floor is applied
    after normalization and the result is renormalized and re-floored, so
    entries end up >= EPS_FLOOR while the sum stays within 1e-10 of 1.
    """
    w = np.maximum(v, 0.0)
    s = w.sum()
    w = w / s
    activations = int(np.count_nonzero(w < EPS_FLOOR))
    if activations:
        w = np.maximum(w, EPS_FLOOR)
        w = w / w.sum()
        w = np.maximum(w, EPS_FLOOR)
    return w, float(np.abs(v - w).sum()), activations


def simulate_observations(
    path: CtmcPath,
    h: SensorVector,
    sigma: float,
    grid: TimeGrid,
    rng: np.random.Generator,
) -> ObservationIncrements:
    """Synthesize observation increments from a hidden path.

    Per cell: the exact drift integral of h over the cell plus
    sigma * sqrt(dt) * xi with xi standard normal. The normals are drawn
    in one call after the path, in grid order, so a fixed stream yields
    identical observations regardless of threading.
    """
    if grid.end > path.horizon + 1e-12:
        raise GridExceedsPath(f"grid ends at {grid.end}, path at {path.horizon}")
    if sigma < 0:
        raise ValueError("sigma must be nonnegative (0 synthesizes noiseless data)")
    times = np.minimum(grid.times, path.horizon)
    cum = path.drift_integral(h, times)
    noise = sigma * np.sqrt(grid.dt) * rng.standard_normal(grid.n_steps)
    return ObservationIncrements(grid=grid, dY=np.diff(cum) + noise, sigma=sigma)


def misspecified_wonham_spec(
    Qtilde: RateMatrix, htilde: SensorVector, sigma: float = 1.0
) -> ApproximateFilterSpec:
    """Filter coefficients of the conditional-law SDE run with the given
    (possibly wrong) model parameters."""
    q = np.asarray(Qtilde, dtype=float)
    hv = np.asarray(htilde, dtype=float)
    if q.shape[0] != hv.shape[0]:
        raise DimensionMismatch("rate matrix and sensor dimensions differ")
    if sigma <= 0:
        raise ValueError("filter coefficients require sigma > 0")
    inv_s2 = 1.0 / (sigma * sigma)

    def gain(t: float, p: np.ndarray) -> np.ndarray:
        return inv_s2 * (hv * p - (p @ hv) * p)

    def drift(t: float, p: np.ndarray) -> np.ndarray:
        return q.T @ p - gain(t, p) * (p @ hv)

    def gain_batch(t: float, pb: np.ndarray) -> np.ndarray:
        return inv_s2 * (hv[None, :] * pb - (pb @ hv)[:, None] * pb)

    def drift_batch(t: float, pb: np.ndarray) -> np.ndarray:
        return pb @ q - gain_batch(t, pb) * (pb @ hv)[:, None]

    return ApproximateFilterSpec(
        drift=drift,
        gain=gain,
        label=f"misspecified(n={q.shape[0]})",
        drift_batch=drift_batch,
        gain_batch=gain_batch,
    )


def exact_wonham_spec(Q: RateMatrix, h: SensorVector, sigma: float = 1.0) -> ApproximateFilterSpec:
    """Coefficients of the exact filter, as a generic spec."""
    spec = misspecified_wonham_spec(Q, h, sigma)
    return ApproximateFilterSpec(
        drift=spec.drift,
        gain=spec.gain,
        label="wonham",
        drift_batch=spec.drift_batch,
        gain_batch=spec.gain_batch,
    )


def integrate_wonham(
    Q: RateMatrix,
    h: SensorVector,
    sigma: float,
    obs: ObservationIncrements,
    init: SimplexVector,
    scheme: str = "zakai",
) -> FilterTrajectory:
    """Integrate the exact filter along one observation path.

    ``scheme="zakai"`` (default) steps the unnormalized linear form
    rho += Q^T rho dt + H rho dY / sigma^2 and renormalizes after each
    step; ``scheme="ks"`` is direct Euler-Maruyama on the normalized
    nonlinear form. Both project onto the interior simplex every step.
    """
    if scheme not in ("zakai", "ks"):
        raise ValueError(f"unknown scheme {scheme!r}")
    if sigma <= 0:
        raise ValueError("integration requires sigma > 0")
    q = np.asarray(Q, dtype=float)
    hv = np.asarray(h, dtype=float)
    p0 = np.asarray(init, dtype=float)
    if not (q.shape[0] == hv.shape[0] == p0.shape[0]):
        raise DimensionMismatch("model dimensions differ")
    n_steps = obs.grid.n_steps
    dt = obs.grid.dt
    inv_s2 = 1.0 / (sigma * sigma)
    qt = q.T.copy()
    out = np.empty((n_steps + 1, p0.shape[0]))
    out[0], _, _ = _project(p0)
    p = out[0]
    activations = 0
    dY = obs.dY
    for k in range(n_steps):
        if scheme == "zakai":
            raw = p + (qt @ p) * dt + inv_s2 * (hv * p) * dY[k]
        else:
            ph = p @ hv
            raw = p + (qt @ p) * dt + inv_s2 * (hv * p - ph * p) * (dY[k] - ph * dt)
        if not np.all(np.isfinite(raw)) or np.max(raw) <= 0:
            raise NonFiniteState(k)
        p, _, act = _project(raw)
        activations += act
        out[k + 1] = p
    if activations:
        log.debug("integrate_wonham(%s): %d floor activations", scheme, activations)
    return FilterTrajectory(
        grid=obs.grid,
        values=out,
        spec_label=f"wonham-{scheme}",
        floor_activations=activations,
    )


def integrate_generic(
    spec: ApproximateFilterSpec,
    obs: ObservationIncrements,
    init: SimplexVector,
) -> FilterTrajectory:
    """Euler-Maruyama for an arbitrary filter spec, with the same
    floor-and-renormalize projection as the exact integrator."""
    n_steps = obs.grid.n_steps
    dt = obs.grid.dt
    times = obs.grid.times
    p0 = np.asarray(init, dtype=float)
    out = np.empty((n_steps + 1, p0.shape[0]))
    out[0], _, _ = _project(p0)
    p = out[0]
    proj = np.zeros(n_steps)
    activations = 0
    dY = obs.dY
    for k in range(n_steps):
        raw = p + spec.drift(times[k], p) * dt + spec.gain(times[k], p) * dY[k]
        if not np.all(np.isfinite(raw)) or np.max(raw) <= 0:
            raise NonFiniteState(k)
        p, proj[k], act = _project(raw)
        activations += act
        out[k + 1] = p
    if activations:
        log.debug("integrate_generic(%s): %d floor activations", spec.label, activations)
    return FilterTrajectory(
        grid=obs.grid,
        values=out,
        spec_label=spec.label,
        projection_l1=proj,
        floor_activations=activations,
    )


def hilbert_error_series(a: FilterTrajectory, b: FilterTrajectory) -> np.ndarray:
    """Hilbert distance between two trajectories at every grid time."""
    if a.values.shape != b.values.shape:
        raise DimensionMismatch("trajectories have different shapes")
    r = np.log(a.values) - np.log(b.values)
    return r.max(axis=1) - r.min(axis=1)


# ---------------------------------------------------------------------------
# batched integration across paths (harness fast path; same stepping and
# projection as the per-path integrators above)
# ---------------------------------------------------------------------------


def _project_batch(raw: np.ndarray, step: int) -> np.ndarray:
    bad = ~np.isfinite(raw).all(axis=1) | (raw.max(axis=1) <= 0)
    if bad.any():
        raise NonFiniteState(step, path=int(np.nonzero(bad)[0][0]))
    w = np.maximum(raw, 0.0)
    w /= w.sum(axis=1, keepdims=True)
    rows = (w < EPS_FLOOR).any(axis=1)
    if rows.any():
        sub = np.maximum(w[rows], EPS_FLOOR)
        sub /= sub.sum(axis=1, keepdims=True)
        w[rows] = np.maximum(sub, EPS_FLOOR)
    return w


def integrate_wonham_batch(
    Q: RateMatrix,
    h: SensorVector,
    sigma: float,
    dY: np.ndarray,
    inits: np.ndarray,
    grid: TimeGrid,
    scheme: str = "zakai",
) -> np.ndarray:
    """Integrate the exact filter for many paths at once.

    ``dY`` has shape (n_paths, n_steps), ``inits`` (n_paths, n_states);
    returns (n_paths, n_steps + 1, n_states). Stepping matches
    ``integrate_wonham`` path by path.
    """
    if scheme not in ("zakai", "ks"):
        raise ValueError(f"unknown scheme {scheme!r}")
    q = np.asarray(Q, dtype=float)
    hv = np.asarray(h, dtype=float)
    inv_s2 = 1.0 / (sigma * sigma)
    dt = grid.dt
    n_paths, n_steps = dY.shape
    out = np.empty((n_paths, n_steps + 1, q.shape[0]))
    p = _project_batch(np.array(inits, dtype=float), 0)
    out[:, 0] = p
    for k in range(n_steps):
        if scheme == "zakai":
            raw = p + (p @ q) * dt + inv_s2 * (hv[None, :] * p) * dY[:, k, None]
        else:
            ph = (p @ hv)[:, None]
            raw = p + (p @ q) * dt + inv_s2 * (hv[None, :] * p - ph * p) * (
                dY[:, k, None] - ph * dt
            )
        p = _project_batch(raw, k)
        out[:, k + 1] = p
    return out


def integrate_spec_batch(
    spec: ApproximateFilterSpec,
    dY: np.ndarray,
    inits: np.ndarray,
    grid: TimeGrid,
) -> np.ndarray:
    """Euler-Maruyama for many paths at once via the spec's batch callables."""
    if spec.drift_batch is None or spec.gain_batch is None:
        raise ValueError(f"spec {spec.label!r} has no batch coefficients")
    dt = grid.dt
    times = grid.times
    n_paths, n_steps = dY.shape
    p = _project_batch(np.array(inits, dtype=float), 0)
    out = np.empty((n_paths, n_steps + 1, p.shape[1]))
    out[:, 0] = p
    for k in range(n_steps):
        raw = (
            p
            + spec.drift_batch(times[k], p) * dt
            + spec.gain_batch(times[k], p) * dY[:, k, None]
        )
        p = _project_batch(raw, k)
        out[:, k + 1] = p
    return out
