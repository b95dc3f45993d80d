"""
Exceptions raised by the diffusion, detection and experiment services
"""


class JumpSiftError(Exception):
    """Base class for every error raised by jumpsift services"""


class ParameterError(JumpSiftError, ValueError):
    """A model parameter or input lies outside its admissible region"""


class SingularDesignError(JumpSiftError, ArithmeticError):
    """The 2x2 Gram matrix of the regression design is numerically singular"""


class PathFormatError(JumpSiftError, ValueError):
    """A path or report file does not follow the expected CSV layout"""


class OutputError(JumpSiftError, OSError):
    """An experiment artifact could not be written"""
