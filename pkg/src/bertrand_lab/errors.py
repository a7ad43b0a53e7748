"""Exception hierarchy shared by the solvers and the CLI."""


class ModelError(Exception):
    """Base class for numerical or model failures (CLI exit code 3)."""


class InvalidInput(ModelError, ValueError):
    pass


class InvalidParameters(InvalidInput):
    pass


class DegenerateModel(ModelError):
    pass


class NoBestResponse(ModelError):
    def __init__(self, message, interval=None):
        super().__init__(message)
        self.interval = interval


class NonConvergence(ModelError):
    """Raised when an iterative solver runs out of iterations.

    The last iterate and iteration count are attached so callers can inspect
    how far the solver got.
    """

    def __init__(self, message, last=None, iterations=None):
        super().__init__(message)
        self.last = last
        self.iterations = iterations


class SingularJacobian(ModelError):
    pass


class UnstableEquilibrium(ModelError):
    pass


class NoInteriorSolution(ModelError):
    pass
