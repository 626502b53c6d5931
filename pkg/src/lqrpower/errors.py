"""Exception types shared across the package.

Every error carries an ``exit_code`` used by the command line front end:
2 for validation/parse problems, 3 for infeasibility, 4 for numerical
failures.
"""


class LqrPowerError(Exception):
    exit_code = 4


class ValidationError(LqrPowerError):
    """Bad input data (file schema, field value, or type invariant)."""

    exit_code = 2

    def __init__(self, message: str, field: str | None = None):
        self.field = field
        if field is not None:
            message = f"{field}: {message}"
        super().__init__(message)


class DegenerateGeometry(ValidationError):
    """Transmitter/receiver geometry with no meaningful path loss."""


class DegeneratePlant(ValidationError):
    """Plant whose state matrix is singular (no finite entropy rate)."""


class NotPositiveDefinite(ValidationError):
    """A covariance that must be positive definite is not."""


class UnequalCycleTimes(ValidationError):
    """Closed-form allocation requires a common cycle time."""


class KTooLarge(ValidationError):
    """Brute-force search is limited to three loops."""


class InfeasibleStability(LqrPowerError):
    """The power budget cannot stabilize every loop.

    Attributes:
        deficit_w: shortfall ``sum(p_min) - p_max`` in watts.
        p_min_w: per-loop minimum stabilizing powers.
    """

    exit_code = 3

    def __init__(self, p_max_w: float, p_min_w: list[float]):
        self.p_max_w = p_max_w
        self.p_min_w = list(p_min_w)
        self.deficit_w = sum(p_min_w) - p_max_w
        worst = sorted(range(len(p_min_w)), key=lambda k: -p_min_w[k])
        detail = ", ".join(f"loop {k}: p_min={p_min_w[k]:.6g} W" for k in worst)
        super().__init__(
            f"stability requires {sum(p_min_w):.6g} W but the budget is "
            f"{p_max_w:.6g} W (deficit {self.deficit_w:.6g} W); {detail}"
        )


class StabilityUnattainable(LqrPowerError):
    """No representable power satisfies the stability rate condition."""

    exit_code = 3


class BelowStabilityThreshold(LqrPowerError):
    """Cost or marginal cost queried at a non-stabilizing power."""


class NoConvergence(LqrPowerError):
    """Fixed-point iteration failed to converge."""


class SingularInnerMatrix(LqrPowerError):
    """R + B'SB is numerically singular in the Riccati update."""


class UnstableClosedLoop(LqrPowerError):
    """The computed feedback gain does not stabilize the plant."""


class NegativePowerWarning(UserWarning):
    """Closed-form allocation produced a non-positive power."""
