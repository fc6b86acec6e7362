# -*- coding: utf-8 -*-
# Generic/Built-in
from dataclasses import dataclass, field, asdict, replace
from concurrent.futures import ThreadPoolExecutor

import logging
import math

import numpy as np
from scipy.optimize import nnls

from ..lib.FlowExceptions import ConfigurationError
from ..fields.Grid import build_grid
from ..fields.InitialData import InitialData, HYPERBOLIC_DISK
from ..metrics.Conformal import ConformalState, scaled_laplacian
from ..stepper.Boundary import BoundarySchedule, CURVATURE_SCALING
from ..stepper.Stepper import ImplicitStepper, DtPolicy
from .Oracle import BoundOracle, BOUNDARY_LAYER_CELLS

# The soliton starts at physical time 1/2, where it equals the hyperbolic disk
SOLITON_OFFSET = 0.5

_log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Tolerance:
    """
    Discretisation tolerance eps_disc(h, dt_max) = safety (c1 h^2 + c2 dt_max),
    never below ``floor``. ``samples`` keeps the (h, dt_max, defect) triples
    the coefficients were fitted to.
    """
    c1: float
    c2: float
    safety: float = 2.0
    floor: float = 1e-9
    samples: list = field(default_factory=list)

    def epsilon(self, h, dt_max):
        return max(self.safety * (self.c1 * h * h + self.c2 * dt_max), self.floor)

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, table):
        return cls(**table)


@dataclass(frozen=True)
class CalibrationSpec:
    kind: str = "radial-1d"
    radius: float = 0.875
    n: int = 16
    dt_max: float = 0.01
    t_end: float = 0.5
    safety: float = 2.0

    def refinements(self):
        # Every h paired with every dt, so both coefficients are identifiable
        return [(n, dt) for dt in (self.dt_max, 0.25 * self.dt_max)
                for n in (self.n, 2 * self.n)]


def soliton_trajectory(kind, radius, n, policy, t_end):
    """
    Flow of the hyperbolic disk data at physical time 1/2 with the exact
    boundary data v0 (1 + 2t): its exact solution is u0 + log(1 + 2t) / 2.
    """
    grid = build_grid(kind, radius, radius / n)
    u0 = InitialData(HYPERBOLIC_DISK).evaluate(grid)
    initial = ConformalState(0.0, u0, SOLITON_OFFSET)
    schedule = BoundarySchedule.from_initial(CURVATURE_SCALING, initial, kappa=-1.0)
    outputs = np.linspace(0.0, t_end, 5)[1:]
    return ImplicitStepper(policy).evolve(initial, schedule, t_end, outputs,
                                          name="soliton_n{}".format(n))


def soliton_defect(trajectory, boundary_layer_cells=BOUNDARY_LAYER_CELLS):
    """
    Worst equality defect of a soliton run: the larger of max |u - exact|
    and the K_lower slack |K + 1/(2t)| away from the boundary layer. The
    initial snapshot carries no time error and is left out.
    """
    oracle = BoundOracle(boundary_layer_cells=boundary_layer_cells)
    nodes, _ = oracle.checked_interior(trajectory.grid)
    u0 = trajectory.initial.u.values
    worst = 0.0
    for snapshot in trajectory.snapshots:
        if snapshot.t <= 0.0:
            continue
        exact = u0 + 0.5 * math.log1p(2.0 * snapshot.t)
        worst = max(worst, float(np.max(np.abs(snapshot.u.values - exact))))
        slack = 0.5 / snapshot.physical_time - scaled_laplacian(snapshot)[nodes]
        if slack.size:
            worst = max(worst, float(np.max(np.abs(slack))))
    return worst


def calibrate(spec=None, policy=None, executor=None, threads=1):
    """
    Fit eps_disc = safety (c1 h^2 + c2 dt_max) to the soliton defects of
    four runs (two spacings by two step lengths) by non-negative least squares.

    Returns:
        Tolerance
    """
    spec = spec or CalibrationSpec()
    policy = policy or DtPolicy()
    if spec.n < 4:
        raise ConfigurationError("calibration needs n >= 4, got {}".format(spec.n))
    floor = 10.0 * policy.newton_tol

    def run(refinement):
        n, dt_max = refinement
        # steps of dt_max from the start, whatever h is
        local = replace(policy, dt_max=dt_max, dt0=dt_max)
        trajectory = soliton_trajectory(spec.kind, spec.radius, n, local, spec.t_end)
        # the excluded layer keeps its width in x as h shrinks
        cells = BOUNDARY_LAYER_CELLS * n / spec.n
        return spec.radius / n, dt_max, soliton_defect(trajectory, cells)

    if executor is not None:
        samples = list(executor.map(run, spec.refinements()))
    else:
        with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
            samples = list(pool.map(run, spec.refinements()))
    design = np.array([[h * h, dt] for h, dt, _ in samples])
    defects = np.array([d for _, _, d in samples])
    coefficients, _ = nnls(design, defects)
    tolerance = Tolerance(float(coefficients[0]), float(coefficients[1]), spec.safety, floor,
                          [{"h": h, "dt_max": dt, "defect": d} for h, dt, d in samples])
    _log.info("calibrated eps_disc coefficients c1={:.4e} c2={:.4e}".format(
        tolerance.c1, tolerance.c2))
    return tolerance
