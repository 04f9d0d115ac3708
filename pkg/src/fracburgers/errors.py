class FracBurgersError(Exception):
    """Base class for package errors."""


class ParameterError(FracBurgersError, ValueError):
    """An argument lies outside the admissible parameter range."""


class ContractViolation(FracBurgersError):
    """A precondition on the data (not the parameters) does not hold."""


class ResampleError(FracBurgersError):
    """A rescaled field cannot be represented on the target grid."""


class InfeasibleError(FracBurgersError):
    """No admissible constant satisfies the required inequalities."""


class ConstructionError(FracBurgersError):
    """A numerically certified construction did not close."""
