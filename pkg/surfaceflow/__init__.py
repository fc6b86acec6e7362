from .lib.FlowExceptions import (
    FlowError,
    ConfigurationError,
    ScenarioValidationError,
    SingularEvaluationError,
    BarrierDomainError,
    GridMismatchError,
    EigenNonConvergenceError,
    NewtonDivergenceError,
    TimeStepUnderflowError,
    MonotonicityViolationError,
    FingerprintMismatchError
)
from .fields.Grid import Grid, build_grid
from .fields.ScalarField import ScalarField
from .fields.InitialData import InitialData
from .metrics.Conformal import ConformalState
from .stepper.Boundary import BoundarySchedule
from .stepper.Stepper import ImplicitStepper, DtPolicy
from .stepper.Trajectory import FlowTrajectory
from .ladder.Ladder import LadderRun, run_ladder
from .oracle.Oracle import BoundOracle
from .oracle.Reports import BoundReport
from .cli.Scenario import Scenario, load_scenario
