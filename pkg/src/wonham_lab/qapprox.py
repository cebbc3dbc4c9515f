"""Low-rank nonnegative approximation of rate matrices, plus the bundled
rounded fixtures used by the approximation experiments.

The factorization strips the diagonal, approximates the remaining
nonnegative matrix by seeded multiplicative updates minimizing squared
Frobenius error, and rebuilds the diagonal so rows sum to zero again.
"""

from __future__ import annotations

import numpy as np

from .ctmc import RateMatrix, validate_rate_matrix
from .errors import RankTooLarge

_MU_EPS = 1e-12


def nmf_approximate_q(
    Q: RateMatrix, rank: int, iters: int = 500, rng: np.random.Generator | None = None
) -> RateMatrix:
    """Rank-constrained nonnegative approximation of a rate matrix.

    The Frobenius objective is nonincreasing across multiplicative-update
    iterations; a violation beyond rounding noise raises.
    """
    q = np.asarray(Q, dtype=float)
    n = q.shape[0]
    if rank < 1 or rank > n:
        raise RankTooLarge(f"rank {rank} not in [1, {n}]")
    rng = np.random.default_rng(0) if rng is None else rng
    a = q.copy()
    np.fill_diagonal(a, 0.0)
    scale = np.sqrt(max(a.mean(), _MU_EPS) / rank)
    w = scale * rng.uniform(0.1, 1.0, size=(n, rank))
    v = scale * rng.uniform(0.1, 1.0, size=(rank, n))
    err_prev = np.linalg.norm(a - w @ v)
    for _ in range(iters):
        w *= (a @ v.T) / np.maximum(w @ (v @ v.T), _MU_EPS)
        v *= (w.T @ a) / np.maximum((w.T @ w) @ v, _MU_EPS)
        err = np.linalg.norm(a - w @ v)
        if err > err_prev * (1.0 + 1e-9) + 1e-12:
            raise RuntimeError("multiplicative update increased the objective")
        err_prev = err
    approx = w @ v
    np.fill_diagonal(approx, 0.0)
    np.fill_diagonal(approx, -approx.sum(axis=1))
    return validate_rate_matrix(approx)


_QTILDE_THREE_STATE = [
    [-2.5, 0.5, 2.0],
    [0.5, -2.5, 2.0],
    [1.5, 1.5, -3.0],
]

_QTILDE_SIX_STATE = [
    [-9.0, 3.04, 1.04, 1.54, 2.43, 0.95],
    [0.94, -7.25, 1.70, 2.02, 1.58, 1.01],
    [2.92, 2.05, -7.8, 0.69, 0.88, 1.26],
    [2.11, 1.24, 0.52, -5.34, 0.84, 0.62],
    [1.13, 0.86, 0.63, 3.02, -8.68, 3.04],
    [1.02, 0.77, 2.64, 1.92, 2.92, -9.28],
]

_FIXTURES = {"three_state": _QTILDE_THREE_STATE, "six_state": _QTILDE_SIX_STATE}


def qtilde_fixture(which: str) -> RateMatrix:
    """Bundled rounded low-rank approximations ("three_state", "six_state").

    Rounding to two significant digits can leave row-sum residue; it is
    absorbed into the diagonal (at most 0.05 per row) so the result is a
    genuine rate matrix.
    """
    if which not in _FIXTURES:
        raise KeyError(f"unknown fixture {which!r}; options: {sorted(_FIXTURES)}")
    q = np.array(_FIXTURES[which], dtype=float)
    residuals = q.sum(axis=1)
    if np.any(np.abs(residuals) > 0.05):
        raise ValueError("fixture rounding residue exceeds 0.05")
    np.fill_diagonal(q, q.diagonal() - residuals)
    return validate_rate_matrix(q)
