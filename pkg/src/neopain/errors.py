"""Exception types shared across the package."""


class ContractError(ValueError):
    """An argument violates an operation's precondition."""


class StateError(RuntimeError):
    """An operation was called in an invalid order (e.g. backward before forward)."""


class DataError(ValueError):
    """A dataset, manifest, or sample is malformed or inconsistent."""


class NoDecisionError(RuntimeError):
    """Fusion was asked to decide with no present modality."""


class NumericsError(ArithmeticError):
    """A numeric op produced NaN or Inf."""
