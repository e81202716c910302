"""Exception types shared across the package."""


class IntegrationError(Exception):
    """Base class for failures while evaluating fields or advancing a state.

    When raised from a trajectory run, ``step`` holds the index of the step that
    failed and ``record`` the partial trajectory collected before the failure.
    """

    def __init__(self, message, *, step=None, record=None):
        super().__init__(message)
        self.step = step
        self.record = record


class DomainError(IntegrationError, ValueError):
    """A field, potential or gradient was evaluated at a singular point."""

    def __init__(self, message, *, x=None, index=None, **kwargs):
        super().__init__(message, **kwargs)
        self.x = x
        self.index = index


class SolverError(IntegrationError, RuntimeError):
    """The fixed-point iteration of an implicit step did not converge."""

    def __init__(self, message, *, residual=None, iterations=None, **kwargs):
        super().__init__(message, **kwargs)
        self.residual = residual
        self.iterations = iterations
