class InvalidState(RuntimeError):
    """An operation's preconditions on its inputs' state do not hold."""


class SolverFailure(RuntimeError):
    """The iterative solver stopped before reaching the requested tolerance."""

    def __init__(self, message, residual=float("nan"), iterations=0):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations
