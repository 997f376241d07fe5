"""Exception types shared across the toolkit."""


class ParameterError(ValueError):
    """A constructor or sampler argument is outside its documented domain."""


class DomainError(ValueError):
    """A law was evaluated outside the region where it is defined."""


class QuadratureError(RuntimeError):
    """Adaptive quadrature failed to meet its tolerance.

    Carries the partial result so callers can decide whether the estimate is
    still usable.
    """

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class SamplingError(RuntimeError):
    """A rejection or Monte Carlo routine exhausted its budget.

    ``diagnostics`` is a dict with whatever the sampler knew at failure time
    (attempt counts, empirical acceptance rate, partial output).
    """

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})


class BudgetError(SamplingError):
    """A step budget ran out mid-path; the partial path is in diagnostics."""
