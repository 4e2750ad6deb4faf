"""Exception hierarchy shared by all hyperlap modules."""


class HyperlapError(Exception):
    """Base class for every error raised by the library."""


class InvalidArgument(HyperlapError, ValueError):
    """Argument has the wrong shape, size or value."""


class UnsupportedSize(HyperlapError, ValueError):
    """Problem is too large for an enumeration-based routine."""


class SpecViolation(HyperlapError, ValueError):
    """Input does not satisfy the preconditions of a tensor definition."""


class NotMetzler(HyperlapError, ValueError):
    """Tensor has a negative off-diagonal entry."""

    def __init__(self, index, value):
        self.index = tuple(int(i) for i in index)
        self.value = float(value)
        one_based = tuple(i + 1 for i in self.index)
        super().__init__(f"tensor is not Metzler: entry {one_based} = {self.value!r} < 0")


class FormatError(HyperlapError, ValueError):
    """Malformed JSON document (tensor, hypergraph or config)."""


class ConvergenceError(HyperlapError, RuntimeError):
    """Iterative solver did not converge."""

    def __init__(self, message, gap=None, iterations=None):
        super().__init__(message)
        self.gap = gap
        self.iterations = iterations


class ReducibleError(HyperlapError, RuntimeError):
    """Power iteration hit a zero component, a sign of reducibility."""


class IntegrationError(HyperlapError, RuntimeError):
    """ODE integrator failed (step-size underflow)."""

    def __init__(self, message, t=None, state=None):
        super().__init__(message)
        self.t = t
        self.state = state
