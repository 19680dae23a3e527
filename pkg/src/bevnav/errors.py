"""Exception taxonomy shared across the package."""


class ContractError(ValueError):
    """A caller violated a documented precondition (shapes, ranges, emptiness)."""


class NumericError(ArithmeticError):
    """A computation produced a non-finite value where a finite one is required."""


class FormatError(RuntimeError):
    """A file or document does not match its declared format (magic bytes, schema)."""


class IntegrityError(RuntimeError):
    """A file parsed but its contents are inconsistent (checksum, byte length, missing data)."""


class NoRouteError(RuntimeError):
    """No road route exists between the requested start and goal."""


class ConfigError(RuntimeError):
    """A configuration document contains unknown sections or keys."""
