# -*- coding: utf-8 -*-
# Generic/Built-in
from dataclasses import dataclass, asdict
from typing import Optional

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import spsolve

from ..lib.FlowComponent import FlowComponent
from ..lib.FlowExceptions import (
    ConfigurationError,
    NewtonDivergenceError,
    TimeStepUnderflowError
)
from ..operators.Laplacian import laplacian_operator, LAYERED
from .Boundary import FAR_FIELD
from .Trajectory import FlowTrajectory

# A Newton correction this large in u means the step is lost
MAX_CORRECTION = 50.0


@dataclass(frozen=True)
class DtPolicy:
    """
    Adaptive time-step policy: start at dt0 (h^2 when unset), halve on
    Newton divergence, double after ``grow_after`` consecutive steps that
    needed at most ``easy_iterations`` Newton iterations, never above
    dt_max, give up below dt_min.
    """
    dt0: Optional[float] = None
    dt_min: float = 1e-10
    dt_max: float = 0.01
    grow_after: int = 5
    easy_iterations: int = 4
    newton_tol: float = 1e-10
    max_newton: int = 30

    def __post_init__(self):
        if not (self.dt_min > 0.0 and self.dt_max >= self.dt_min):
            raise ConfigurationError(
                "need 0 < dt_min <= dt_max, got {} and {}".format(self.dt_min, self.dt_max))
        if self.dt0 is not None and not self.dt0 > 0.0:
            raise ConfigurationError("dt0 must be positive, got {}".format(self.dt0))
        if not self.newton_tol > 0.0 or self.max_newton < 1:
            raise ConfigurationError("invalid Newton settings")

    def initial_dt(self, grid):
        dt = self.dt0 if self.dt0 is not None else grid.h * grid.h
        return max(min(dt, self.dt_max), self.dt_min)

    def to_dict(self):
        return asdict(self)


@dataclass(frozen=True)
class NewtonReport:
    iterations: int
    residual: float


class ImplicitStepper(FlowComponent):
    """
    Backward Euler in u for u_t = e^{-2u} Δu with boundary data at the new
    time level.

    Each step solves the row-scaled system

        F(u) = e^{2u} (u - u_old) - dt (A u + g) = 0

    by Newton with Jacobian diag(e^{2u} (1 + 2 (u - u_old))) - dt A and sparse
    direct solves. Convergence is measured on |F_i| / (e^{2u_i} + dt |A_ii|),
    which is the size of the Newton correction in u and stays clear of the
    roundoff floor when e^{2u} is tiny or huge.

    g is B u_b for plain Dirichlet data and the layered forcing for ramp and
    complete data; neither depends on u, so the Jacobian is the same. Zero-flux
    and far-field closures make the boundary node an unknown, and the far-field
    flux adds its derivative to the last diagonal entry.
    """

    def __init__(self, policy=None):
        super().__init__()
        self.policy = policy or DtPolicy()

    def step(self, state, dt, schedule):
        return self.advance(state, dt, schedule)[0]

    def advance(self, state, dt, schedule, t_new=None):
        if not dt > 0.0:
            raise ConfigurationError("dt must be positive, got {}".format(dt))
        grid = state.grid
        operator = laplacian_operator(grid)
        if t_new is None:
            t_new = state.t + dt
        n = grid.n_interior
        far_field = schedule.form == FAR_FIELD
        if schedule.is_dirichlet:
            u_b = schedule.boundary_u(t_new)
            u_old = state.u.values[:n]
            matrix = operator.A
            if schedule.closure == LAYERED:
                forcing = operator.layer_forcing(u_b, t_new)
            else:
                forcing = operator.B @ u_b
        else:
            if not grid.is_radial:
                raise ConfigurationError("{} stepping needs a radial grid".format(schedule.form))
            u_b = None
            u_old = state.u.values
            matrix = operator.neumann_matrix()
            forcing = 0.0
        stiffness = dt * np.abs(matrix.diagonal())
        edge_volume = operator.edge_volume()
        t_phys = t_new + state.time_offset

        u = u_old.copy()
        policy = self.policy
        residual = np.inf
        for iteration in range(policy.max_newton + 1):
            with np.errstate(over="ignore", invalid="ignore"):
                e2u = np.exp(2.0 * u)
                F = e2u * (u - u_old) - dt * (matrix @ u + forcing)
                if far_field:
                    flux, slope = schedule.far_field_flux(grid.r, u[-1], t_phys)
                    F[-1] -= dt * flux / edge_volume
                residual = float(np.max(np.abs(F) / (e2u + stiffness)))
            if not np.isfinite(residual):
                raise NewtonDivergenceError(
                    "non-finite Newton residual at t={} dt={}".format(t_new, dt))
            if residual <= policy.newton_tol:
                break
            if iteration == policy.max_newton:
                raise NewtonDivergenceError(
                    "Newton residual {:.3e} after {} iterations at t={} dt={}".format(
                        residual, iteration, t_new, dt))
            diagonal = e2u * (1.0 + 2.0 * (u - u_old))
            if far_field:
                diagonal[-1] -= dt * slope / edge_volume
            jacobian = sp.diags(diagonal) - dt * matrix
            with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
                correction = spsolve(jacobian.tocsc(), F)
            if not np.all(np.isfinite(correction)) or \
                    np.max(np.abs(correction)) > MAX_CORRECTION:
                raise NewtonDivergenceError(
                    "Newton correction blew up at t={} dt={}".format(t_new, dt))
            u = u - correction

        values = u if u_b is None else np.concatenate([u, u_b])
        self._log.debug("t={:.6g} dt={:.3e} newton={} residual={:.2e}".format(
            t_new, dt, iteration, residual))
        return state.advanced(t_new, values, schedule.closure), NewtonReport(iteration, residual)

    def evolve(self, initial, schedule, t_end, output_times=(), time_plan=None,
               name="", fingerprint=""):
        """
        Integrate from the initial state to t_end.

        Args:
            initial: ConformalState at t = 0
            schedule: BoundarySchedule
            t_end: final time, > 0
            output_times: times to snapshot (hit exactly); t_end always is
            time_plan: accepted step end-times of another trajectory to
                replay instead of choosing dt adaptively
            name: trajectory name
            fingerprint: scenario fingerprint stamped on the trajectory

        Returns:
            FlowTrajectory
        """
        if not t_end > 0.0:
            raise ConfigurationError("t_end must be positive, got {}".format(t_end))
        if initial.t != 0.0:
            raise ConfigurationError("trajectories start at t = 0")
        targets = sorted({float(t) for t in output_times if 0.0 < t < t_end} | {float(t_end)})
        record = _StepRecord()
        self._log.info("evolving {} on {} to t={} ({})".format(
            name or "trajectory", initial.grid, t_end,
            "replayed plan" if time_plan is not None else "adaptive dt"))
        if time_plan is None:
            snapshots = self._adaptive(initial, schedule, targets, record)
        else:
            snapshots = self._replay(initial, schedule, targets, time_plan, record)
        trajectory = FlowTrajectory(
            snapshots, fingerprint, schedule.describe(), record.times, record.dts,
            record.iterations, record.residuals, record.snapshot_residuals, name)
        self._log.info("finished {}: {} steps, {} snapshots".format(
            name or "trajectory", len(record.times), len(snapshots)))
        return trajectory

    def _take(self, state, end, schedule, record):
        new, report = self.advance(state, end - state.t, schedule, t_new=end)
        record.add(end, end - state.t, report)
        return new, report

    def _adaptive(self, state, schedule, targets, record):
        policy = self.policy
        dt = policy.initial_dt(state.grid)
        easy = 0
        snapshots = [state]
        for target in targets:
            while state.t < target:
                remaining = target - state.t
                end = target if remaining <= dt * (1.0 + 1e-6) else state.t + dt
                try:
                    state, report = self._take(state, end, schedule, record)
                except NewtonDivergenceError as error:
                    # state is still the pre-step state, so this halves the failed step
                    attempted = end - state.t
                    dt = 0.5 * attempted
                    easy = 0
                    if dt < policy.dt_min:
                        raise TimeStepUnderflowError(
                            "dt fell below dt_min={} at t={}: {}".format(
                                policy.dt_min, state.t, error.msg))
                    self._log.warning("halving dt to {:.3e} at t={:.6g}".format(dt, state.t))
                    continue
                if report.iterations <= policy.easy_iterations:
                    easy += 1
                    if easy >= policy.grow_after:
                        dt = min(2.0 * dt, policy.dt_max)
                        easy = 0
                else:
                    easy = 0
            snapshots.append(state)
            record.snapshot_residuals.append(record.residuals[-1])
        return snapshots

    def _replay(self, state, schedule, targets, time_plan, record):
        ends = sorted({float(t) for t in time_plan if 0.0 < t < targets[-1]} | set(targets))
        wanted = set(targets)
        snapshots = [state]
        for end in ends:
            state = self._reach(state, end, schedule, record)
            if end in wanted:
                snapshots.append(state)
                record.snapshot_residuals.append(record.residuals[-1])
        return snapshots

    def _reach(self, state, end, schedule, record):
        # One planned step; local halving when it does not converge
        try:
            return self._take(state, end, schedule, record)[0]
        except NewtonDivergenceError as error:
            half = 0.5 * (end - state.t)
            if half < self.policy.dt_min:
                raise TimeStepUnderflowError(
                    "replayed step at t={} cannot be split further: {}".format(
                        state.t, error.msg))
            self._log.warning("splitting planned step at t={:.6g}".format(state.t))
            state = self._reach(state, state.t + half, schedule, record)
            return self._reach(state, end, schedule, record)


class _StepRecord(object):

    def __init__(self):
        self.times = []
        self.dts = []
        self.iterations = []
        self.residuals = []
        self.snapshot_residuals = [0.0]

    def add(self, t, dt, report):
        self.times.append(t)
        self.dts.append(dt)
        self.iterations.append(report.iterations)
        self.residuals.append(report.residual)


def step(state, dt, schedule, policy=None):
    """
    One backward Euler step of the flow with boundary data at t + dt.

    Raises:
        NewtonDivergenceError when Newton misses newton_tol within budget
    """
    return ImplicitStepper(policy).step(state, dt, schedule)


def evolve(initial, schedule, t_end, dt_policy=None, output_times=(), time_plan=None,
           name="", fingerprint=""):
    return ImplicitStepper(dt_policy).evolve(
        initial, schedule, t_end, output_times, time_plan, name, fingerprint)
