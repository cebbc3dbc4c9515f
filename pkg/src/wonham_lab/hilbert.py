"""Hilbert projective metric, log-ratio charts, and pairwise log-ratio gaps.

The chart theta_k sends an interior probability vector p to the log ratios
log(p^i / p^k); the gap matrix between two filters collects
log(p^i/p^k) - log(q^i/q^k) over all ordered index pairs, and its maximum
equals the Hilbert distance of the pair.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ctmc import EPS_FLOOR, SimplexVector
from .errors import NonFinite, NonInteriorInput


@dataclass(frozen=True)
class DeltaMatrix:
    """Antisymmetric matrix of pairwise log-ratio differences between two
    interior simplex vectors; entry (i, k) = log(p^i/p^k) - log(q^i/q^k)."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise ValueError("gap matrix must be square")
        v = v.copy()
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @property
    def n_states(self) -> int:
        return self.values.shape[0]

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.values, dtype=dtype)


def _support(v: np.ndarray) -> np.ndarray:
    return v >= EPS_FLOOR


def hilbert_distance(mu, nu) -> float:
    """Hilbert projective distance between two nonnegative vectors.

    Returns +inf when the supports (entrywise against the interior floor)
    differ; boundary inputs are legal.
    """
    m = np.asarray(mu, dtype=float)
    n = np.asarray(nu, dtype=float)
    if m.shape != n.shape:
        raise ValueError("dimension mismatch")
    sm, sn = _support(m), _support(n)
    if not np.array_equal(sm, sn):
        return float("inf")
    if not sm.any():
        raise ValueError("zero vector has no projective distance")
    r = m[sm] / n[sn]
    return float(np.log(r.max() / r.min()))


def theta_chart(p, k: int) -> np.ndarray:
    """Log-ratio chart anchored at state k: theta^i = log(p^i / p^k)."""
    v = np.asarray(p, dtype=float)
    if np.any(v < EPS_FLOOR):
        raise NonInteriorInput("chart requires an interior vector")
    out = np.log(v) - np.log(v[k])
    out[k] = 0.0
    return out


def theta_inverse(theta, k: int) -> SimplexVector:
    """Invert the log-ratio chart via an overflow-safe softmax."""
    t = np.asarray(theta, dtype=float)
    if not np.all(np.isfinite(t)):
        raise NonFinite("chart coordinates must be finite")
    if t[k] != 0.0:
        raise ValueError("anchor coordinate must be exactly 0")
    e = np.exp(t - t.max())
    return SimplexVector(e / e.sum())


def delta_matrix(pi, pitilde) -> DeltaMatrix:
    """Pairwise log-ratio gaps between two interior simplex vectors."""
    p = np.asarray(pi, dtype=float)
    q = np.asarray(pitilde, dtype=float)
    if p.shape != q.shape:
        raise ValueError("dimension mismatch")
    if np.any(p < EPS_FLOOR) or np.any(q < EPS_FLOOR):
        raise NonInteriorInput("gap matrix requires interior vectors")
    a = np.log(p) - np.log(q)
    out = a[:, None] - a[None, :]
    np.fill_diagonal(out, 0.0)
    return DeltaMatrix(out)


def delta_infinity(delta: DeltaMatrix) -> tuple[float, int, int]:
    """Maximal gap, with its argmax pair (i*, k*).

    The maximum equals the Hilbert distance of the generating pair; i* and
    k* respectively maximize and minimize the componentwise ratio p^j/q^j.
    Ties break to the lexicographically smallest off-diagonal pair.
    """
    v = np.asarray(delta, dtype=float)
    n = v.shape[0]
    masked = v.copy()
    np.fill_diagonal(masked, -np.inf)
    flat = int(np.argmax(masked))
    i_star, k_star = divmod(flat, n)
    return float(v[i_star, k_star]), i_star, k_star
