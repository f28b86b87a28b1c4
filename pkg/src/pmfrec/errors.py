"""Exception hierarchy shared across the package.

The CLI maps these onto process exit codes: configuration problems exit
with 2, data problems with 3, numerical failures with 4.
"""


class PmfrecError(Exception):
    """Base class for all package errors."""


class ConfigError(PmfrecError):
    """Invalid or inconsistent configuration."""


class DataError(PmfrecError):
    """Malformed, missing, or out-of-contract input data."""


class CellBudgetError(DataError):
    """Dense joint table would exceed the configured cell budget."""

    def __init__(self, required: int, budget: int):
        self.required = required
        self.budget = budget
        super().__init__(
            f"dense joint table needs {required} cells, exceeding the budget of {budget}"
        )


class AlphabetMismatchError(DataError):
    """Model and data disagree on variable count or alphabet sizes."""


class MissingPairError(DataError):
    """A required pairwise marginal is absent from the available set."""

    def __init__(self, j: int, k: int):
        self.pair = (j, k)
        super().__init__(f"pairwise marginal for variables ({j}, {k}) is not available")


class EmptyPairSetError(DataError):
    """No pairwise marginals are available at all."""


class NumericalError(PmfrecError):
    """A numerical routine failed or produced non-finite values."""


class RankDeficiencyError(NumericalError):
    """A matrix that must have full column rank is numerically rank deficient."""


class DegenerateEvidenceError(NumericalError):
    """Conditioning evidence has zero probability under the model."""
