"""Hidden-signal machinery: rate matrices, simplex vectors, exact CTMC paths.

The chain is sampled exactly (exponential holding times + embedded jump
chain), never by time discretization, so path sampling contributes no
discretization error to bound validation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    NegativeOffDiagonal,
    NonInteriorInput,
    Reducible,
    RowSumNonZero,
    SingularSystem,
)

# Numerical floor defining "interior of the simplex". The continuous theory
# keeps filters strictly interior almost surely; floating point needs a floor.
EPS_FLOOR = 1e-12

ROW_SUM_TOL = 1e-12
SIMPLEX_SUM_TOL = 1e-10


@dataclass(frozen=True)
class RateMatrix:
    """Transition-intensity matrix of a CTMC (rows sum to zero).

    ``strictly_positive`` records whether every off-diagonal entry is > 0,
    which the contraction rates require to be nonzero. It is checked at
    validation, never assumed.
    """

    entries: np.ndarray
    strictly_positive: bool

    @property
    def n_states(self) -> int:
        return self.entries.shape[0]

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.entries, dtype=dtype)


@dataclass(frozen=True)
class SimplexVector:
    """Probability vector on the n+1 states."""

    probs: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float)
        if p.ndim != 1:
            raise ValueError("probability vector must be 1-D")
        if np.any(p < 0):
            raise ValueError("probability vector has negative entries")
        s = p.sum()
        if abs(s - 1.0) > SIMPLEX_SUM_TOL:
            raise ValueError(f"probabilities sum to {s}, expected 1")
        p = p.copy()
        p.flags.writeable = False
        object.__setattr__(self, "probs", p)

    @property
    def n_states(self) -> int:
        return self.probs.shape[0]

    @property
    def interior(self) -> bool:
        """True when every entry clears the interior floor."""
        return bool(np.all(self.probs >= EPS_FLOOR))

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.probs, dtype=dtype)


@dataclass(frozen=True)
class SensorVector:
    """Observation-drift levels, one per state."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 1:
            raise ValueError("sensor vector must be 1-D")
        if not np.all(np.isfinite(v)):
            raise ValueError("sensor vector has non-finite entries")
        v = v.copy()
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @property
    def n_states(self) -> int:
        return self.values.shape[0]

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.values, dtype=dtype)


@dataclass(frozen=True)
class CtmcPath:
    """Exact jump-time trajectory of the hidden signal on [0, horizon].

    ``states`` has one more entry than ``jump_times``; ``absorbed`` is set
    when the path stopped jumping because it hit a state with zero exit rate.
    """

    jump_times: np.ndarray
    states: np.ndarray
    horizon: float
    absorbed: bool = False

    def __post_init__(self):
        t = np.asarray(self.jump_times, dtype=float)
        s = np.asarray(self.states, dtype=np.int64)
        if s.shape[0] != t.shape[0] + 1:
            raise ValueError("need exactly one more state than jump times")
        if t.size and (np.any(np.diff(t) <= 0) or t[0] <= 0 or t[-1] >= self.horizon):
            raise ValueError("jump times must be strictly increasing inside (0, horizon)")
        if np.any(s[1:] == s[:-1]):
            raise ValueError("consecutive states must differ")
        t, s = t.copy(), s.copy()
        t.flags.writeable = False
        s.flags.writeable = False
        object.__setattr__(self, "jump_times", t)
        object.__setattr__(self, "states", s)

    def occupation_times(self, n_states: int) -> np.ndarray:
        """Total time spent in each state over [0, horizon]."""
        edges = np.concatenate(([0.0], self.jump_times, [self.horizon]))
        durations = np.diff(edges)
        out = np.zeros(n_states)
        np.add.at(out, self.states, durations)
        return out

    def drift_integral(self, h: SensorVector, times: np.ndarray) -> np.ndarray:
        """Exact cumulative integral of h(X_s) over [0, t] at the given times.

        The integrand is piecewise constant between jumps, so the integral is
        evaluated exactly from the jump skeleton.
        """
        hv = np.asarray(h, dtype=float)
        edges = np.concatenate(([0.0], self.jump_times))  # segment start times
        seg_h = hv[self.states]
        # cumulative integral at the start of each segment
        seg_cum = np.concatenate(([0.0], np.cumsum(seg_h[:-1] * np.diff(edges))))
        idx = np.searchsorted(edges, times, side="right") - 1
        return seg_cum[idx] + seg_h[idx] * (times - edges[idx])


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid t_k = t0 + k*dt, k = 0..n_steps."""

    dt: float
    n_steps: int
    t0: float = 0.0

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.n_steps < 1:
            raise ValueError("need at least one step")

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(self.n_steps + 1)

    @property
    def end(self) -> float:
        return self.t0 + self.dt * self.n_steps


def validate_rate_matrix(entries) -> RateMatrix:
    """Validate a raw square matrix as a transition-intensity matrix.

    Validation only: rows are never renormalized. Raises
    ``NegativeOffDiagonal`` / ``RowSumNonZero`` on violations.
    """
    q = np.array(entries, dtype=float)
    if q.ndim != 2 or q.shape[0] != q.shape[1]:
        raise ValueError("rate matrix must be square")
    n = q.shape[0]
    off = ~np.eye(n, dtype=bool)
    bad = (q < 0) & off
    if np.any(bad):
        i, j = map(int, np.argwhere(bad)[0])
        raise NegativeOffDiagonal(i, j, float(q[i, j]))
    residuals = q.sum(axis=1)
    if np.any(np.abs(residuals) > ROW_SUM_TOL):
        i = int(np.argmax(np.abs(residuals)))
        raise RowSumNonZero(i, float(residuals[i]))
    strictly_positive = bool(np.all(q[off] > 0)) if n > 1 else True
    q.flags.writeable = False
    return RateMatrix(entries=q, strictly_positive=strictly_positive)


def _check_irreducible(q: np.ndarray) -> None:
    """Strong connectivity of the directed graph of nonzero off-diagonals."""
    n = q.shape[0]
    adj = (q > 0) & ~np.eye(n, dtype=bool)

    def reaches_all(a: np.ndarray) -> bool:
        seen = np.zeros(n, dtype=bool)
        seen[0] = True
        frontier = [0]
        while frontier:
            nxt = a[frontier].any(axis=0) & ~seen
            frontier = list(np.nonzero(nxt)[0])
            seen |= nxt
        return bool(seen.all())

    if not (reaches_all(adj) and reaches_all(adj.T)):
        raise Reducible("rate matrix is reducible on its nonzero off-diagonal graph")


def stationary_distribution(Q: RateMatrix) -> SimplexVector:
    """Solve Q^T pi = 0, sum(pi) = 1 on the bordered dense system.

    Requires irreducibility (checked by reachability). The residual
    ||Q^T pi||_inf must come out below 1e-10.
    """
    q = np.asarray(Q, dtype=float)
    n = q.shape[0]
    if n == 1:
        return SimplexVector(np.array([1.0]))
    _check_irreducible(q)
    a = np.vstack([q.T, np.ones(n)])
    b = np.zeros(n + 1)
    b[-1] = 1.0
    pi, *_ = np.linalg.lstsq(a, b, rcond=None)
    pi = np.maximum(pi, 0.0)
    total = pi.sum()
    if not np.isfinite(total) or total <= 0:
        raise SingularSystem("stationary solve failed")
    pi /= total
    residual = np.max(np.abs(q.T @ pi))
    if residual > 1e-10:
        raise SingularSystem(f"stationary residual {residual} exceeds 1e-10")
    return SimplexVector(pi)


def sample_ctmc_path(
    Q: RateMatrix, init: SimplexVector, T: float, rng: np.random.Generator
) -> CtmcPath:
    """Sample one exact CTMC path on [0, T].

    Initial state ~ init, holding times Exponential(-q_ii), embedded jumps
    with probabilities q_ij / (-q_ii). Deterministic given the rng state.
    """
    if T <= 0:
        raise ValueError("horizon must be positive")
    q = np.asarray(Q, dtype=float)
    n = q.shape[0]
    if init.n_states != n:
        raise ValueError("initial law dimension does not match rate matrix")
    state = int(rng.choice(n, p=np.asarray(init)))
    t = 0.0
    jump_times: list[float] = []
    states = [state]
    absorbed = False
    while True:
        rate = -q[state, state]
        if rate <= 0.0:
            absorbed = True
            break
        t += rng.exponential(1.0 / rate)
        if t >= T:
            break
        probs = q[state].clip(min=0.0)
        probs[state] = 0.0
        probs /= probs.sum()
        state = int(rng.choice(n, p=probs))
        jump_times.append(t)
        states.append(state)
    return CtmcPath(
        jump_times=np.array(jump_times),
        states=np.array(states, dtype=np.int64),
        horizon=float(T),
        absorbed=absorbed,
    )


def cyclic_rate_matrix(n: int) -> RateMatrix:
    """Benchmark generator on n+1 states: fast nearest-neighbour hopping on a
    cycle (rate n+1), slow jumps everywhere else (rate 1).

    For n = 2 the matrix is the fully symmetric one with -2 on the diagonal.
    Neighbours wrap around (cyclic on the n+1 states), so every row balances
    with diagonal -3n for n >= 3. The deterministic contraction rate of the
    result is 2 for every n.
    """
    if n < 2:
        raise ValueError("need n >= 2")
    m = n + 1
    if n == 2:
        q = np.ones((3, 3)) - 3.0 * np.eye(3)
        return validate_rate_matrix(q)
    q = np.ones((m, m))
    idx = np.arange(m)
    q[idx, (idx + 1) % m] = n + 1
    q[idx, (idx - 1) % m] = n + 1
    np.fill_diagonal(q, 0.0)
    np.fill_diagonal(q, -q.sum(axis=1))
    return validate_rate_matrix(q)


def random_sensor(n: int, rng: np.random.Generator) -> SensorVector:
    """Random sensor with entries z_i + x_i, z_i integer in {-10..10},
    x_i uniform on [0, 1]. Integers are drawn before the uniforms."""
    if n < 1:
        raise ValueError("need n >= 1")
    z = rng.integers(-10, 11, size=n + 1)
    x = rng.uniform(0.0, 1.0, size=n + 1)
    return SensorVector(z + x)


def perturb_with_signs(mu: SimplexVector, signs: np.ndarray) -> SimplexVector:
    """Add signs * (min(mu)/2) componentwise and renormalize."""
    p = np.asarray(mu, dtype=float)
    shift = 0.5 * p.min()
    out = p + np.asarray(signs, dtype=float) * shift
    return SimplexVector(out / out.sum())


def perturb_initial(mu: SimplexVector, rng: np.random.Generator) -> SimplexVector:
    """Perturb an interior law by +/- half its smallest entry with independent
    fair Bernoulli signs, then renormalize. The result stays interior."""
    if not mu.interior:
        raise NonInteriorInput("perturbation requires an interior law")
    signs = 2 * rng.integers(0, 2, size=mu.n_states) - 1
    return perturb_with_signs(mu, signs)


def matrix_to_text(a) -> str:
    """Plain-text matrix format: one row per line, space-separated decimals."""
    arr = np.atleast_2d(np.asarray(a, dtype=float))
    return "\n".join(" ".join(format(x, ".17g") for x in row) for row in arr)


def matrix_from_text(text: str) -> np.ndarray:
    rows = [
        [float(tok) for tok in line.split()]
        for line in text.strip().splitlines()
        if line.strip()
    ]
    if not rows:
        raise ValueError("empty matrix text")
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise ValueError("ragged matrix text")
    out = np.array(rows, dtype=float)
    return out[0] if out.shape[0] == 1 else out
