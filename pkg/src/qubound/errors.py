"""Exception hierarchy."""


class QuboundError(Exception):
    pass


class NumericalFailure(QuboundError, ArithmeticError):
    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class NotPSD(QuboundError, ValueError):
    def __init__(self, message, eigenvalue=None):
        super().__init__(message)
        self.eigenvalue = eigenvalue


class DimMismatch(QuboundError, ValueError):
    pass


class ZeroProbabilityBranch(QuboundError, ValueError):
    """Conditioning on an outcome whose probability is at or below the floor."""

    def __init__(self, message, probability=None):
        super().__init__(message)
        self.probability = probability


class InvalidProjector(QuboundError, ValueError):
    pass


class DeadTrajectory(QuboundError, ValueError):
    pass


class InvalidParameter(QuboundError, ValueError):
    pass


class ParameterOutOfRange(QuboundError, ValueError):
    pass


class ConstructionFailure(QuboundError, ArithmeticError):
    def __init__(self, message, residuals=None):
        super().__init__(message)
        self.residuals = residuals
