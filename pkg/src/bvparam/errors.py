"""Exception types shared across the package."""


class BvparamError(Exception):
    """Base class for all package-specific errors."""


class KindMismatch(BvparamError):
    """Two operator factors were composed whose kinds do not chain."""


class ShapeMismatch(BvparamError):
    """Matrix dimensions do not conform for the requested operation."""


class BudgetExceeded(BvparamError):
    """A rewrite or Groebner computation exceeded its step/degree budget."""


class NotAdjointable(BvparamError):
    """A generator fails the class-0 / transmission gate for formal adjoints."""

    def __init__(self, generator: str, reason: str = ""):
        self.generator = generator
        msg = f"generator {generator!r} has no declared formal adjoint"
        if reason:
            msg += f" ({reason})"
        super().__init__(msg)


class NotALift(BvparamError):
    """Candidate P does not satisfy L P L = L."""


class NotInvertible(BvparamError):
    """An order-reducing matrix was not declared invertible."""


class OutsideSubalgebra(BvparamError):
    """Operation requires the commutative constant-coefficient subalgebra."""


class SymbolSingular(BvparamError):
    """A symbol that must be inverted vanishes somewhere on the real line."""


class DegenerateWronskian(BvparamError):
    """The boundary-correction system of the two-point solver is singular."""


class QuadratureNotConverged(BvparamError):
    """Richardson extrapolation of a truncated integral did not stabilize."""


class UnrealizedGenerator(BvparamError):
    """A symbolic generator has no entry in the numeric realization."""

    def __init__(self, generator: str):
        self.generator = generator
        super().__init__(f"no numeric realization bound for generator {generator!r}")


class ParseError(BvparamError):
    """A system file could not be parsed."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
