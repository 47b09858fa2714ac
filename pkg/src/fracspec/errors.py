"""Exception hierarchy shared by every module."""


class FracspecError(Exception):
    """Base class for library errors."""


class ParameterError(FracspecError, ValueError):
    """A numeric parameter is outside its admissible domain."""


class StructuralError(FracspecError, ValueError):
    """An operand does not have the structure an operation requires."""


class SingularityError(FracspecError, ArithmeticError):
    """The result would not be integrable, or evaluation hits a pole."""


class ShapeError(FracspecError, ValueError):
    """A manufactured function is not of a supported closed-form shape."""


class AssemblyError(FracspecError, ArithmeticError):
    """A matrix needed during assembly is numerically singular."""


class SolverError(FracspecError, ArithmeticError):
    """A dense solve failed (exactly singular system)."""
