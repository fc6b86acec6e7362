# -*- coding: utf-8 -*-


class FlowError(Exception):
    # Base class for our custom exceptions
    # Renders as "<ClassName> : <message>"; the cli decides the exit code
    def __init__(self, msg):
        self.msg = msg
        self.args = "{0.__name__} : {1}".format(type(self), msg),


class ConfigurationError(FlowError):
    # Raised for grid or stepping parameters outside their documented ranges
    pass


class ScenarioValidationError(ConfigurationError):
    # Raised when a scenario file does not parse or validate
    pass


class SingularEvaluationError(FlowError):
    # Raised when initial data is singular at a non-exterior node
    pass


class BarrierDomainError(FlowError):
    # Raised when a barrier is evaluated outside the set it is defined on
    pass


class GridMismatchError(FlowError):
    # Raised when fields or trajectories from different grids are combined
    pass


class EigenNonConvergenceError(FlowError):
    # Raised when inverse power iteration exhausts its iteration budget
    pass


class NewtonDivergenceError(FlowError):
    # Raised when a Newton solve does not reach newton_tol within budget
    pass


class TimeStepUnderflowError(NewtonDivergenceError):
    # Raised when dt halving drops below dt_min
    pass


class MonotonicityViolationError(FlowError):
    # Raised when a ladder loses the ordering the comparison principle gives
    pass


class FingerprintMismatchError(FlowError):
    # Raised when serialized artifacts do not match their recorded seal
    pass
