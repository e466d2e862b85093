"""Exception hierarchy shared by all modules."""


class LagprFemError(Exception):
    """Base class for every error raised by this package."""


class InvalidArgs(LagprFemError, ValueError):
    pass


class NonInvertibleF(LagprFemError, ValueError):
    pass


class SingularC(LagprFemError, ValueError):
    """Right Cauchy-Green tensor with det C <= 1e-12.

    ``index`` carries the offending design row when raised from dataset
    construction.
    """

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class IoError(LagprFemError, OSError):
    pass


class SchemaMismatch(LagprFemError, ValueError):
    pass


class InvalidTheta(LagprFemError, ValueError):
    pass


class CholeskyFailure(LagprFemError, ArithmeticError):
    pass


class DuplicateInputs(LagprFemError, ValueError):
    pass


class EmptyDataset(LagprFemError, ValueError):
    pass


class LinearSolveFailure(LagprFemError, ArithmeticError):
    pass


class UnknownProblem(LagprFemError, KeyError):
    pass
