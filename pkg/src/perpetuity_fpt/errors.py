"""Exception hierarchy shared by all modules."""


class PerpetuityError(Exception):
    """Base class for library errors."""


class ValidationError(PerpetuityError, ValueError):
    """Malformed law parameters or configuration values."""

    def __init__(self, field, message):
        self.field = field
        self.message = message
        super().__init__(f"{field}: {message}")


class UnsupportedFamilyError(PerpetuityError):
    pass


class DomainError(PerpetuityError, ValueError):
    """Argument outside the domain where the generating function is finite."""


class NoRootError(PerpetuityError):
    """No sign change of the cumulant generating function on the probed interval."""

    def __init__(self, message, interval=None):
        self.interval = interval
        super().__init__(message)


class NoSolutionError(PerpetuityError):
    """A slope equation has no solution; carries the attainable slope interval."""

    def __init__(self, message, slope_interval=None):
        self.slope_interval = slope_interval
        super().__init__(message)


class NumericEvaluationError(PerpetuityError):
    def __init__(self, message, achieved_tolerance=None):
        self.achieved_tolerance = achieved_tolerance
        super().__init__(message)


class SamplerStallError(PerpetuityError):
    pass


class PreconditionError(PerpetuityError):
    """An estimator was called outside the regime its formula applies to."""


class CapabilityError(PerpetuityError):
    """Requested computation exceeds a hard size cap (e.g. path enumeration)."""


class DegenerateFitError(PerpetuityError):
    pass
