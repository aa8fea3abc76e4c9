"""Exception types shared across the package."""


class DrsubError(Exception):
    pass


class InputError(DrsubError, ValueError):
    """Arguments violate a documented precondition."""


class CapabilityError(DrsubError):
    """The requested operation is not supported for this input size or body."""


class DiagnosticError(DrsubError):
    """A numerical diagnostic had nothing valid to work with."""


class ConfigError(InputError):
    pass


class DataError(InputError):
    pass
