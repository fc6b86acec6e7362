# -*- coding: utf-8 -*-
# Generic/Built-in
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from dataclasses import replace

import logging
import math

import numpy as np

from ..lib.FlowExceptions import ConfigurationError, MonotonicityViolationError
from ..fields.Grid import build_grid
from ..fields.InitialData import InitialData
from ..metrics.Conformal import ConformalState, CUSP_C, volume, far_field_volume
from ..stepper.Boundary import BoundarySchedule, RAMP, FROZEN, FAR_FIELD
from ..stepper.Stepper import ImplicitStepper

M_RAMP = "m-ramp"
K_EXHAUST = "k-exhaust"
PLANE_EXHAUST = "plane-exhaust"
SINGLE = "single"
AXES = (M_RAMP, K_EXHAUST, PLANE_EXHAUST, SINGLE)

# Relative ordering violations up to this many newton_tol are roundoff
MONOTONE_SLACK_FACTOR = 10.0

# Volume-law fit window as fractions of the expected extinction time
FIT_WINDOW = (0.1, 0.6)

COMPANION = "companion"
SCALED = "scaled"
FAR_PREFIX = "far_R"

_log = logging.getLogger(__name__)


def parameter_label(value):
    # JSON artifacts carry no infinities; the complete rung is written as "inf"
    value = float(value)
    return "inf" if math.isinf(value) else value


class LadderRun(object):
    """
    One approximation ladder: a trajectory per parameter plus the
    diagnostics measured on the probe set.

    ``gaps[i]`` is the largest relative change |v_{i+1} - v_i| / v_i on the
    probe set between consecutive rungs and ``ordering[i]`` the smallest
    signed relative difference in the direction the comparison principle
    predicts. ``limit_index`` names the rung used as the limit proxy.
    Plane ladders with finite area also carry one far-field flow per
    truncation in ``far_field``; the area law is read off those.
    """

    def __init__(self, name, fingerprint, axis, parameters, trajectories, gaps=(),
                 ordering=(), limit_index=-1, converged=False, probe_radius=0.0,
                 probe_times=(), companion=None, scaled=None, details=None, far_field=()):
        if axis not in AXES:
            raise ConfigurationError("unknown ladder axis {}".format(axis))
        if len(parameters) != len(trajectories):
            raise ConfigurationError("one trajectory per ladder parameter is needed")
        if far_field and len(far_field) != len(trajectories):
            raise ConfigurationError("one far-field flow per truncation is needed")
        if axis != SINGLE:
            _require_ladder([float(p) for p in parameters], axis)
        self.name = name
        self.fingerprint = fingerprint
        self.axis = axis
        self.parameters = [float(p) for p in parameters]
        self.trajectories = list(trajectories)
        self.gaps = [float(g) for g in gaps]
        self.ordering = [float(o) for o in ordering]
        self.limit_index = limit_index % len(trajectories)
        self.converged = bool(converged)
        self.probe_radius = float(probe_radius)
        self.probe_times = [float(t) for t in probe_times]
        self.companion = companion
        self.scaled = scaled
        self.details = dict(details or {})
        self.far_field = list(far_field)

    @property
    def limit(self):
        return self.trajectories[self.limit_index]

    @property
    def primary(self):
        # The trajectory the bound checks run on
        return self.limit

    def all_trajectories(self):
        extra = [t for t in (self.companion, self.scaled) if t is not None]
        return self.trajectories + self.far_field + extra

    def to_dict(self):
        return {
            "name": self.name,
            "fingerprint": self.fingerprint,
            "axis": self.axis,
            "parameters": [parameter_label(p) for p in self.parameters],
            "trajectories": [t.name for t in self.trajectories],
            "gaps": self.gaps,
            "ordering": self.ordering,
            "limit_index": self.limit_index,
            "limit": self.limit.name,
            "converged": self.converged,
            "probe_radius": self.probe_radius,
            "probe_times": self.probe_times,
            "companion": self.companion.name if self.companion is not None else None,
            "scaled": self.scaled.name if self.scaled is not None else None,
            "far_field": [t.name for t in self.far_field],
            "details": self.details,
        }

    @classmethod
    def from_dict(cls, table, trajectories):
        """Rebuild from ``to_dict`` output and a name -> FlowTrajectory map."""
        def pick(name):
            return trajectories[name] if name is not None else None
        return cls(table["name"], table["fingerprint"], table["axis"], table["parameters"],
                   [trajectories[n] for n in table["trajectories"]], table["gaps"],
                   table["ordering"], table["limit_index"], table["converged"],
                   table["probe_radius"], table["probe_times"], pick(table["companion"]),
                   pick(table["scaled"]), table["details"],
                   [trajectories[n] for n in table.get("far_field", [])])

    def __repr__(self):
        return "LadderRun({}, {}={})".format(self.name, self.axis, self.parameters)


def _require_ladder(parameters, axis):
    if len(parameters) < 3:
        raise ConfigurationError("{} ladder needs at least 3 parameters".format(axis))
    if any(b <= a for a, b in zip(parameters, parameters[1:])):
        raise ConfigurationError("{} parameters must increase strictly".format(axis))


@contextmanager
def _pool(scenario, executor):
    if executor is not None:
        yield executor
    else:
        with ThreadPoolExecutor(max_workers=max(1, scenario.threads)) as pool:
            yield pool


def rung_name(prefix, value):
    return "{}_{:g}".format(prefix, value)


def _initial_data(scenario):
    data = scenario.initial
    if not isinstance(data, InitialData):
        data = InitialData.from_dict(data)
    return data


def initial_state(scenario, grid, time_offset=0.0, dilation=1.0):
    data = _initial_data(scenario)
    return ConformalState(0.0, data.evaluate(grid, scenario.seed, dilation), time_offset)


def probe_times(scenario):
    return [t for t in scenario.probe_times if 0.0 <= t <= scenario.t_end]


def _run_rungs(scenario, grids, schedules, names, lead, executor):
    """
    Evolve one flow per grid. The ``lead`` rung picks its steps adaptively and
    every other rung replays its time plan, so all rungs share one time
    discretisation and compare pointwise.
    """
    stepper = ImplicitStepper(scenario.policy)
    outputs = scenario.output_times()
    initials = [initial_state(scenario, g) for g in grids]

    def job(index, plan=None):
        schedule = schedules[index](initials[index])
        return stepper.evolve(initials[index], schedule, scenario.t_end, outputs, plan,
                              names[index], scenario.fingerprint)

    leader = job(lead)
    others = [i for i in range(len(grids)) if i != lead]
    with _pool(scenario, executor) as pool:
        replayed = list(pool.map(lambda i: job(i, leader.time_plan), others))
    trajectories = [None] * len(grids)
    trajectories[lead] = leader
    for index, trajectory in zip(others, replayed):
        trajectories[index] = trajectory
    return trajectories


def compare_on_probe(lower, upper, probe_radius, times):
    """
    Relative comparison of two trajectories on their common probe nodes and
    times: returns (max |v_up - v_lo| / v_lo, min (v_up - v_lo) / v_lo).
    """
    mine, theirs = lower.grid.common_nodes(upper.grid)
    keep = lower.grid.radii[mine] <= probe_radius * (1.0 + 1e-12)
    mine = mine[keep]
    theirs = theirs[keep]
    gap = 0.0
    ordering = math.inf
    for t in times:
        u_lo = lower.snapshot_at(t).u.values[mine]
        u_up = upper.snapshot_at(t).u.values[theirs]
        rel = np.expm1(2.0 * (u_up - u_lo))
        if rel.size:
            gap = max(gap, float(np.max(np.abs(rel))))
            ordering = min(ordering, float(np.min(rel)))
    return gap, (ordering if math.isfinite(ordering) else 0.0)


def _check_order(ordering, scenario, what):
    floor = -MONOTONE_SLACK_FACTOR * scenario.policy.newton_tol
    if ordering < floor:
        raise MonotonicityViolationError(
            "{} lost its ordering: relative violation {:.3e} below {:.1e}".format(
                what, ordering, floor))


def _ramp(m):
    # m = inf gives the complete closure
    return lambda initial: BoundarySchedule.from_initial(RAMP, initial, m=m)


def _frozen(initial):
    return BoundarySchedule.from_initial(FROZEN, initial)


def _far_field(C):
    return lambda initial: BoundarySchedule.from_initial(FAR_FIELD, initial, cusp_C=C)


def run_m_ladder(scenario, k, m_list, executor=None):
    """
    Boundary-ramp ladder on B_{1-1/k}: one flow per ramp steepness m, an
    infinite m standing for the complete closure.

    Gaps must shrink towards the infinite-boundary limit and the flows must
    increase with m. The limit proxy is the first rung whose gap to its
    predecessor drops below ladder_tol, else the steepest ramp.

    Raises:
        MonotonicityViolationError when a steeper ramp gives a smaller flow
    """
    m_list = [float(m) for m in m_list]
    _require_ladder(m_list, M_RAMP)
    if not k >= 2:
        raise ConfigurationError("k must be >= 2, got {}".format(k))
    grid = build_grid(scenario.grid_kind, 1.0 - 1.0 / k, scenario.disk_spacing)
    names = [rung_name("m", m) for m in m_list]
    trajectories = _run_rungs(scenario, [grid] * len(m_list), [_ramp(m) for m in m_list],
                              names, len(m_list) - 1, executor)
    probe_radius = scenario.probe_fraction * grid.r
    times = probe_times(scenario)
    gaps = []
    ordering = []
    for lower, upper in zip(trajectories, trajectories[1:]):
        gap, order = compare_on_probe(lower, upper, probe_radius, times)
        _check_order(order, scenario, "m-ladder {} -> {}".format(lower.name, upper.name))
        gaps.append(gap)
        ordering.append(order)
    limit_index = len(m_list) - 1
    converged = False
    for i, gap in enumerate(gaps):
        if gap < scenario.ladder_tol:
            limit_index = i + 1
            converged = True
            break
    _log.info("m-ladder on k={}: gaps {} (converged={})".format(
        k, ["{:.3e}".format(g) for g in gaps], converged))
    return LadderRun(scenario.name, scenario.fingerprint, M_RAMP, m_list, trajectories, gaps,
                     ordering, limit_index, converged, probe_radius, times,
                     details={"k": k, "decreasing_gaps": _decreasing(gaps)})


def run_k_ladder(scenario, k_list, m_final, executor=None):
    """
    Domain exhaustion by B_{1-1/k} with the m_final closure (complete when
    m_final is infinite): flows must decrease as the disk grows. All disks
    share the spacing h = 1/N so the smaller node sets nest in the larger
    ones.

    The exhaustion limit is approached like 1/k, so ``converged`` (last
    change below ladder_tol) is reported but only the ordering is enforced.
    """
    k_list = [float(k) for k in k_list]
    _require_ladder(k_list, K_EXHAUST)
    if k_list[0] < 2:
        raise ConfigurationError("k values must be >= 2")
    grids = [build_grid(scenario.grid_kind, 1.0 - 1.0 / k, scenario.disk_spacing)
             for k in k_list]
    names = [rung_name("k", k) for k in k_list]
    trajectories = _run_rungs(scenario, grids, [_ramp(m_final)] * len(grids), names,
                              len(grids) - 1, executor)
    probe_radius = scenario.probe_fraction * grids[0].r
    times = probe_times(scenario)
    gaps = []
    ordering = []
    for smaller, larger in zip(trajectories, trajectories[1:]):
        # v_k >= v_{k+1}: the larger disk carries the lower flow
        gap, order = compare_on_probe(larger, smaller, probe_radius, times)
        _check_order(order, scenario, "k-ladder {} -> {}".format(smaller.name, larger.name))
        gaps.append(gap)
        ordering.append(order)
    converged = gaps[-1] < scenario.ladder_tol
    _log.info("k-ladder: changes {} (converged={})".format(
        ["{:.3e}".format(g) for g in gaps], converged))
    return LadderRun(scenario.name, scenario.fingerprint, K_EXHAUST, k_list, trajectories,
                     gaps, ordering, len(k_list) - 1, converged, probe_radius, times,
                     details={"m_final": parameter_label(m_final),
                              "decreasing_gaps": _decreasing(gaps)})


def run_plane_exhaust(scenario, R_list, m_final, executor=None):
    """
    Plane flows approximated on radial truncations B_R; the flows decrease
    as R grows. Rungs use the m_final closure (complete when infinite), or
    frozen data when the scenario asks for them.

    Data of finite area also get one far-field flow per truncation, whose
    area plus matched cusp tail gives the area series and fitted slope.
    """
    R_list = [float(R) for R in R_list]
    _require_ladder(R_list, PLANE_EXHAUST)
    if not scenario.is_radial:
        raise ConfigurationError("plane exhaustion runs on radial grids only")
    spacing = R_list[0] / scenario.n
    grids = [build_grid(scenario.grid_kind, R, spacing) for R in R_list]
    names = [rung_name("R", R) for R in R_list]
    closure = _frozen if scenario.boundary == FROZEN else _ramp(m_final)
    trajectories = _run_rungs(scenario, grids, [closure] * len(grids), names,
                              len(grids) - 1, executor)
    probe_radius = scenario.probe_fraction * R_list[0]
    times = probe_times(scenario)
    gaps = []
    ordering = []
    for smaller, larger in zip(trajectories, trajectories[1:]):
        gap, order = compare_on_probe(larger, smaller, probe_radius, times)
        _check_order(order, scenario, "plane ladder {} -> {}".format(smaller.name, larger.name))
        gaps.append(gap)
        ordering.append(order)
    finite_area = _initial_data(scenario).finite_plane_area
    far_field = []
    if finite_area:
        far_field = _run_rungs(scenario, grids, [_far_field(scenario.cusp_C)] * len(grids),
                               [rung_name(FAR_PREFIX, R) for R in R_list], len(grids) - 1,
                               executor)
    run = LadderRun(scenario.name, scenario.fingerprint, PLANE_EXHAUST, R_list, trajectories,
                    gaps, ordering, len(R_list) - 1, gaps[-1] < scenario.ladder_tol,
                    probe_radius, times,
                    details={"m_final": parameter_label(m_final),
                             "closure": FROZEN if scenario.boundary == FROZEN else RAMP,
                             "finite_area": finite_area},
                    far_field=far_field)
    run.details.update(volume_law_fit(run, scenario.cusp_C))
    return run


def run_single(scenario, executor=None):
    """One flow on the scenario disk with the configured boundary schedule."""
    grid = build_grid(scenario.grid_kind, scenario.radius, scenario.radius / scenario.n)
    initial = initial_state(scenario, grid, scenario.time_offset)
    schedule = BoundarySchedule.from_initial(
        scenario.boundary, initial, m=scenario.m, kappa=scenario.kappa,
        cusp_C=scenario.cusp_C)
    stepper = ImplicitStepper(scenario.policy)
    trajectory = stepper.evolve(initial, schedule, scenario.t_end, scenario.output_times(),
                                name="single", fingerprint=scenario.fingerprint)
    return LadderRun(scenario.name, scenario.fingerprint, SINGLE, [scenario.radius],
                     [trajectory], converged=True,
                     probe_radius=scenario.probe_fraction * grid.r,
                     probe_times=probe_times(scenario))


def run_companion(scenario, primary):
    """
    Frozen-boundary flow from the primary's initial data on its grid,
    replaying its time plan. Its boundary data never exceed the ramp's, so
    it must stay below the primary everywhere.
    """
    stepper = ImplicitStepper(scenario.policy)
    return stepper.evolve(primary.initial, _frozen(primary.initial), scenario.t_end,
                          primary.times[1:], primary.time_plan, COMPANION,
                          scenario.fingerprint)


def run_scaled(scenario, reference, schedule_description, alpha):
    """
    The parabolically rescaled problem w(x, t) = v(alpha x, alpha^2 t): data
    u0(alpha x) on the disk of radius r / alpha with the reference boundary
    schedule read at alpha^2 t.

    The rescaled run keeps the reference spacing h, so in reference units it
    is resolved alpha times finer, and it chooses its own steps with the dt
    limits stretched by 1 / alpha^2. Only the snapshot times are shared.
    """
    if not alpha > 0.0:
        raise ConfigurationError("scaling factor must be positive, got {}".format(alpha))
    grid = reference.grid
    scaled_grid = build_grid(grid.kind, grid.r / alpha, grid.h)
    stretch = 1.0 / (alpha * alpha)
    initial = initial_state(scenario, scaled_grid, reference.time_offset * stretch, alpha)
    description = dict(schedule_description)
    schedule = BoundarySchedule.from_initial(
        description["form"], initial, m=description.get("m", 0.0),
        kappa=description.get("kappa", 0.0),
        time_scale=description.get("time_scale", 1.0) / stretch,
        cusp_C=description.get("cusp_C", CUSP_C))
    policy = scenario.policy
    policy = replace(policy, dt_max=policy.dt_max * stretch, dt_min=policy.dt_min * stretch,
                     dt0=None if policy.dt0 is None else policy.dt0 * stretch)
    outputs = [t * stretch for t in reference.times[1:]]
    return ImplicitStepper(policy).evolve(initial, schedule, reference.final.t * stretch,
                                          outputs, name=SCALED,
                                          fingerprint=scenario.fingerprint)


def run_ladder(scenario, executor=None):
    """Run the scenario's ladder axis plus the companion and rescaled flows it asks for."""
    with _pool(scenario, executor) as pool:
        if scenario.axis == M_RAMP:
            run = run_m_ladder(scenario, scenario.k, scenario.m_list, pool)
        elif scenario.axis == K_EXHAUST:
            run = run_k_ladder(scenario, scenario.k_list, scenario.m_final, pool)
        elif scenario.axis == PLANE_EXHAUST:
            run = run_plane_exhaust(scenario, scenario.R_list, scenario.m_final, pool)
        else:
            run = run_single(scenario, pool)
        extra = {}
        if scenario.wants("comparison"):
            extra[COMPANION] = pool.submit(run_companion, scenario, run.primary)
        if scenario.wants("scaling_symmetry"):
            extra[SCALED] = pool.submit(run_scaled, scenario, run.primary,
                                        run.primary.schedule, scenario.scaling_alpha)
        if COMPANION in extra:
            run.companion = extra[COMPANION].result()
        if SCALED in extra:
            run.scaled = extra[SCALED].result()
            run.details["alpha"] = scenario.scaling_alpha
    return run


def volume_series(trajectory, C):
    # Far-field area (whole grid plus matched cusp tail) per snapshot
    return [far_field_volume(s, C) for s in trajectory.snapshots]


def fit_volume_law(times, volumes, expected_T):
    """
    Straight-line fit of the area over t in [0.1 T, 0.6 T].

    Returns:
        (slope, extinction estimate) or None when the window holds fewer
        than three snapshots
    """
    times = np.asarray(times, dtype=float)
    volumes = np.asarray(volumes, dtype=float)
    window = (times >= FIT_WINDOW[0] * expected_T) & (times <= FIT_WINDOW[1] * expected_T)
    if np.count_nonzero(window) < 3:
        return None
    slope, intercept = np.polyfit(times[window], volumes[window], 1)
    return float(slope), float(-intercept / slope) if slope != 0.0 else math.inf


def volume_law_fit(run, C):
    """
    Area-law diagnostics of a plane ladder: initial area of the widest
    truncation, expected extinction time Vol0 / 4 pi and, per truncation
    radius R (the r_cut of its area), the fitted slope and extinction
    estimate of its far-field flow. Slopes are None without far-field flows.
    """
    widest = run.trajectories[-1]
    vol0 = volume(widest.initial)
    expected_T = vol0 / (4.0 * math.pi)
    slopes = []
    extinction = []
    for trajectory in run.far_field:
        times = trajectory.times + trajectory.time_offset
        fit = fit_volume_law(times, volume_series(trajectory, C), expected_T)
        slopes.append(None if fit is None else fit[0])
        extinction.append(None if fit is None else fit[1])
    if not run.far_field:
        slopes = [None] * len(run.trajectories)
        extinction = [None] * len(run.trajectories)
    return {"vol0": vol0, "expected_T": expected_T, "r_cut": list(run.parameters),
            "slopes": slopes, "extinction": extinction}


def _decreasing(values):
    return all(b < a for a, b in zip(values, values[1:]))
