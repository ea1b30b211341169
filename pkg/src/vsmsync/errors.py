"""Exception hierarchy shared by the simulator modules."""


class VsmSyncError(Exception):
    """Base class for all errors raised by vsmsync."""


class InvalidInputError(VsmSyncError, ValueError):
    """Malformed arguments: wrong shapes, non-positive parameters, bad indices."""


class InfeasibleError(VsmSyncError, ValueError):
    """The requested operating point cannot exist (e.g. net power imbalance)."""


class NumericError(VsmSyncError, ArithmeticError):
    """A non-finite value appeared in a state vector."""

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class NoConvergenceError(VsmSyncError, ArithmeticError):
    """Newton iteration stopped without meeting its tolerance."""

    def __init__(self, message, residual_norm, iterations):
        super().__init__(message)
        self.residual_norm = residual_norm
        self.iterations = iterations


class DivergenceError(VsmSyncError, ArithmeticError):
    """Time integration blew up (non-finite or runaway angles)."""

    def __init__(self, message, time):
        super().__init__(message)
        self.time = time
