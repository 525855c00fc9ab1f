"""Exception hierarchy for fi_lab."""


class FiLabError(Exception):
    """Base class for every error raised by this package."""


class ChainError(FiLabError, ValueError):
    """A transition matrix or stationary vector failed validation."""


class NegativeEntry(ChainError):
    pass


class RowSumError(ChainError):
    def __init__(self, row: int, total: float):
        super().__init__(f"row {row} sums to {total!r}, expected 1")
        self.row = row
        self.total = total


class NotIrreducible(ChainError):
    pass


class NotReversible(ChainError):
    pass


class StationarityError(ChainError):
    pass


class DimensionMismatch(FiLabError, ValueError):
    pass


class NegativeValue(FiLabError, ValueError):
    pass


class NonPositive(FiLabError, ValueError):
    pass


class NegativeArgument(FiLabError, ValueError):
    pass


class NegativeTime(FiLabError, ValueError):
    pass


class TrivialChain(FiLabError, ValueError):
    """Raised when an operation needs at least two states."""


class NoConvergence(FiLabError, RuntimeError):
    pass


class KernelViolation(FiLabError, RuntimeError):
    pass


class LPInfeasible(FiLabError, RuntimeError):
    pass


class LPUnbounded(FiLabError, RuntimeError):
    pass


class NotProbability(FiLabError, ValueError):
    pass


class InvalidParams(FiLabError, ValueError):
    pass


class DisconnectedSample(FiLabError, RuntimeError):
    pass


class InputMismatch(FiLabError, ValueError):
    pass


class NotApplicable(FiLabError, ValueError):
    pass


class ParseError(FiLabError, ValueError):
    pass


class SchemaError(FiLabError, ValueError):
    pass
