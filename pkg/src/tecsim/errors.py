"""Exception types shared across the package."""


class TecsimError(Exception):
    """Base class for all package errors."""


class CapacityError(TecsimError, ValueError):
    """A register or schedule is larger than the simulator supports."""


class ValidationError(TecsimError, ValueError):
    """Malformed gate, circuit, state or configuration."""


class QubitIndexError(ValidationError, IndexError):
    """Duplicate or out-of-range qubit index."""


class UnsupportedError(TecsimError):
    """The operation is not defined for the given input (e.g. measurement in unitary_of)."""


class RoutingError(TecsimError):
    """A gate could not be placed on the coupling map."""


class UncorrectableError(TecsimError):
    """The error pattern exceeds what the code can correct."""


class ParseError(ValidationError):
    """Circuit or config text violates its schema."""
