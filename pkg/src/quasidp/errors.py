"""Exception hierarchy shared by all quasidp modules."""


class QuasidpError(Exception):
    """Base class for all errors raised by this package."""


class DimensionError(QuasidpError):
    """Operands defined over state sets of different sizes."""


class DomainError(QuasidpError):
    """A scalar parameter lies outside its admissible interval."""


class AdmissibilityError(QuasidpError):
    """A control is not admissible at the given state."""


class ValidationError(QuasidpError):
    """A model document violates a structural invariant."""


class ParseError(ValidationError):
    """A model document is not well-formed JSON."""


class EnumerationCapError(QuasidpError):
    """Policy enumeration refused: the policy count exceeds the cap."""

    def __init__(self, count: int, cap: int):
        super().__init__(f"{count} deterministic policies exceed the enumeration cap of {cap}")
        self.count = count
        self.cap = cap


class PreconditionError(QuasidpError):
    """A documented algorithm precondition does not hold for the given inputs."""


class SamplingError(QuasidpError):
    """A pair sampler produced no usable sample."""
