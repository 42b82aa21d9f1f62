"""Exception types shared across the toolkit."""


class ValidationError(ValueError):
    """Input does not describe a valid group/algebra element or subspace."""


class DomainError(ValueError):
    """Argument lies outside the domain where an operation is defined."""


class NumericalError(ArithmeticError):
    """A numerical routine failed or produced an inconsistent result."""


class BoundViolation(AssertionError):
    """A proven inequality failed numerically beyond its tolerance."""
