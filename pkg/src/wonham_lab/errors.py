"""Exception types shared across the package."""

from __future__ import annotations


class WonhamLabError(Exception):
    """Base class for all package errors."""


class NegativeOffDiagonal(WonhamLabError):
    def __init__(self, i: int, j: int, value: float):
        super().__init__(f"off-diagonal entry ({i}, {j}) = {value} is negative")
        self.i, self.j, self.value = i, j, value


class RowSumNonZero(WonhamLabError):
    def __init__(self, i: int, residual: float):
        super().__init__(f"row {i} sums to {residual}, expected 0")
        self.i, self.residual = i, residual


class Reducible(WonhamLabError):
    """Rate matrix is not irreducible on its nonzero off-diagonal graph."""


class SingularSystem(WonhamLabError):
    """Stationary linear system could not be solved to tolerance."""


class GridExceedsPath(WonhamLabError):
    """Time grid extends past the sampled path horizon."""


class DimensionMismatch(WonhamLabError):
    pass


class NonFiniteState(WonhamLabError):
    """An integration step produced NaN/inf (dt too large for the model)."""

    def __init__(self, step: int, path: int | None = None):
        where = f"step {step}" if path is None else f"step {step}, path {path}"
        super().__init__(f"non-finite filter state at {where}")
        self.step = step
        self.path = path


class NonInteriorInput(WonhamLabError):
    """Input vector is not in the interior of the simplex."""


class NonFinite(WonhamLabError):
    pass


class NegativeRate(WonhamLabError):
    pass


class GridMismatch(WonhamLabError):
    pass


class RankTooLarge(WonhamLabError):
    pass


class BoundViolation(WonhamLabError):
    """A pathwise bound was violated in a run that requires zero violations."""


class SchemaMismatch(WonhamLabError):
    """CSV/config does not conform to the documented schema."""


class SubsetFallbackWarning(UserWarning):
    """Exact subset minimization exceeded its size cap; simple rate used."""
