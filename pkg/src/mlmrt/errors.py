"""Exception types shared across the package."""


class MlmrtError(Exception):
    """Base class for all errors raised by this package."""


class InvalidProbability(MlmrtError):
    """A randomization probability is outside its admissible range."""


class InvalidSchedule(MlmrtError):
    """Level addition days are unordered, duplicated, or out of range."""


class DegenerateTrend(MlmrtError):
    """The trend constraint system has no unique solution."""


class NonConvergence(MlmrtError):
    """A series or iteration failed to reach tolerance within its cap."""


class InsufficientN(MlmrtError):
    """Sample size too small for the requested test statistic's degrees of freedom."""


class NoSolution(MlmrtError):
    """No sample size below the search cap satisfies the target."""


class SingularQ(MlmrtError):
    """The design information matrix is not invertible to working precision."""

    def __init__(self, message: str, level: int | None = None):
        super().__init__(message)
        self.level = level


class RankDeficient(MlmrtError):
    """The stacked design matrix does not identify all coefficients."""

    def __init__(self, message: str, columns: list[str] | None = None):
        super().__init__(message)
        self.columns = columns or []


class SingularLeverage(MlmrtError):
    """(I - H_i) is not invertible for some participant."""

    def __init__(self, message: str, participant=None):
        super().__init__(message)
        self.participant = participant


class LevelMismatch(MlmrtError):
    """A record assigns a level that is unavailable at its time point."""


class ConfigError(MlmrtError):
    """A run configuration document failed validation.

    ``path`` points at the offending field, e.g. ``beta_mean[2]``.
    """

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path
        self.detail = message


class SchemaError(MlmrtError):
    """A data file (CSV) failed schema validation; carries a line number."""

    def __init__(self, message: str, line: int | None = None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line
