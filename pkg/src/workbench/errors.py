"""Exception hierarchy shared by all workbench modules."""


class WorkbenchError(Exception):
    """Base class for every error raised by the workbench."""


class InvalidInterval(WorkbenchError, ValueError):
    pass


class NonConvergence(WorkbenchError, ArithmeticError):
    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class PoleAtEndpoint(WorkbenchError, ValueError):
    pass


class UnresolvedCell(WorkbenchError, ArithmeticError):
    pass


class AllSingular(WorkbenchError, ArithmeticError):
    pass


class NonFiniteValue(WorkbenchError, ValueError):
    pass


class EvaluationAtSingular(WorkbenchError, ValueError):
    pass


class SingularPoint(EvaluationAtSingular):
    pass


class Divergent(WorkbenchError, ArithmeticError):
    pass


class NonZeroMean(WorkbenchError, ValueError):
    pass


class HypothesisViolated(WorkbenchError, ValueError):
    pass


class InvalidP(WorkbenchError, ValueError):
    pass


class InvalidDescriptor(WorkbenchError, ValueError):
    pass
