import math

import numpy as np
import pytest

from surfaceflow.lib.FlowExceptions import (BarrierDomainError, ConfigurationError,
                                             NewtonDivergenceError, TimeStepUnderflowError)
from surfaceflow.fields.Grid import build_grid, RADIAL, CARTESIAN
from surfaceflow.operators.Laplacian import PLAIN, LAYERED
from surfaceflow.metrics.Conformal import volume, far_field_volume
from surfaceflow.stepper.Boundary import (BoundarySchedule, RAMP, COMPLETE, FROZEN,
                                          CURVATURE_SCALING, NONE, FAR_FIELD, LAYER_CAP,
                                          closure_of)
from surfaceflow.oracle.Oracle import BoundOracle
from surfaceflow.oracle.Reports import PASS
from surfaceflow.stepper.Stepper import DtPolicy, ImplicitStepper, step, evolve
from .conftest import hyperbolic_u, state_of


def test_ramp_growth():
    schedule = BoundarySchedule(RAMP, [0.0], m=4.0)
    assert schedule.log_growth(0.5) == pytest.approx(4.0 * 0.25 + 1.0)
    assert schedule.boundary_v(0.5)[0] == pytest.approx(math.exp(2.0))
    stretched = BoundarySchedule(RAMP, [0.0], m=4.0, time_scale=0.25)
    assert stretched.log_growth(2.0) == pytest.approx(schedule.log_growth(0.5))


def test_curvature_scaling_growth():
    schedule = BoundarySchedule(CURVATURE_SCALING, [0.0, 1.0], kappa=-1.0)
    np.testing.assert_allclose(schedule.boundary_u(1.0), [0.5 * math.log(3.0),
                                                          1.0 + 0.5 * math.log(3.0)])
    sphere = BoundarySchedule(CURVATURE_SCALING, [0.0], kappa=1.0)
    with pytest.raises(BarrierDomainError):
        sphere.boundary_u(0.5)


def test_frozen_and_zero_flux():
    assert BoundarySchedule(FROZEN, [0.3]).boundary_u(7.0)[0] == 0.3
    assert not BoundarySchedule(NONE, [0.3]).is_dirichlet
    assert BoundarySchedule(RAMP, [0.0], m=2.0).describe() == {
        "form": RAMP, "time_scale": 1.0, "m": 2.0}


@pytest.mark.parametrize("form, m", [("sideways", 0.0), (RAMP, -1.0)])
def test_schedule_rejects(form, m):
    with pytest.raises(ConfigurationError):
        BoundarySchedule(form, [0.0], m=m)


def test_policy():
    grid = build_grid(RADIAL, 1.0, 1.0 / 32)
    assert DtPolicy().initial_dt(grid) == pytest.approx(1.0 / 1024)
    assert DtPolicy(dt0=1.0).initial_dt(grid) == 0.01
    with pytest.raises(ConfigurationError):
        DtPolicy(dt_min=1.0, dt_max=0.1)
    with pytest.raises(ConfigurationError):
        DtPolicy(max_newton=0)


@pytest.mark.parametrize("kind", [RADIAL, CARTESIAN])
def test_flat_data_is_a_fixed_point(kind):
    initial = state_of("constant 0", build_grid(kind, 1.0, 0.125))
    schedule = BoundarySchedule.from_initial(FROZEN, initial)
    trajectory = evolve(initial, schedule, 0.1, output_times=(0.05,))
    np.testing.assert_allclose(trajectory.times, [0.0, 0.05, 0.1])
    np.testing.assert_allclose(trajectory.u_matrix(), 0.0, atol=1e-12)
    assert trajectory.step_times[-1] == 0.1


def test_single_step_keeps_time_offset(radial_disk):
    initial = state_of("hyperbolic-disk", radial_disk, time_offset=0.5)
    schedule = BoundarySchedule.from_initial(CURVATURE_SCALING, initial, kappa=-1.0)
    after = step(initial, 1e-3, schedule)
    assert after.t == pytest.approx(1e-3)
    assert after.physical_time == pytest.approx(0.501)
    np.testing.assert_allclose(after.u.boundary, schedule.boundary_u(1e-3))


def test_hyperbolic_flow_is_reproduced(radial_disk):
    initial = state_of("hyperbolic-disk", radial_disk)
    schedule = BoundarySchedule.from_initial(CURVATURE_SCALING, initial, kappa=-1.0)
    trajectory = ImplicitStepper().evolve(initial, schedule, 0.5, output_times=(0.25,))
    inner = radial_disk.radii <= 0.5
    for snapshot in trajectory.snapshots:
        exact = hyperbolic_u(radial_disk.radii, snapshot.t)
        np.testing.assert_allclose(snapshot.u.values[inner], exact[inner], atol=2e-2)
    assert max(trajectory.newton_residuals) <= 1e-10


def test_steeper_ramp_gives_larger_flow():
    grid = build_grid(RADIAL, 0.5, 1.0 / 32)
    initial = state_of("constant 0", grid)
    stepper = ImplicitStepper()
    steep = stepper.evolve(initial, BoundarySchedule.from_initial(RAMP, initial, m=4.0), 0.2)
    gentle = stepper.evolve(initial, BoundarySchedule.from_initial(RAMP, initial, m=0.0), 0.2,
                            time_plan=steep.time_plan)
    assert gentle.step_times == steep.step_times
    assert np.all(steep.final.u.values >= gentle.final.u.values - 1e-9)
    assert steep.final.u.values[0] > gentle.final.u.values[0]


def test_replayed_plan_is_reproduced(radial_disk):
    initial = state_of("hyperbolic-disk", radial_disk)
    schedule = BoundarySchedule.from_initial(RAMP, initial, m=1.0)
    stepper = ImplicitStepper()
    first = stepper.evolve(initial, schedule, 0.1, output_times=(0.05,))
    again = stepper.evolve(initial, schedule, 0.1, output_times=(0.05,),
                           time_plan=first.time_plan)
    assert again.step_times == first.step_times
    np.testing.assert_array_equal(again.u_matrix(), first.u_matrix())


def test_newton_budget(radial_disk):
    initial = state_of("hyperbolic-disk", radial_disk)
    schedule = BoundarySchedule.from_initial(RAMP, initial, m=0.0)
    policy = DtPolicy(dt0=0.01, dt_min=1e-3, dt_max=0.01, newton_tol=1e-14, max_newton=1)
    with pytest.raises(NewtonDivergenceError):
        step(initial, 0.01, schedule, policy)
    with pytest.raises(TimeStepUnderflowError):
        evolve(initial, schedule, 0.1, policy)


def test_zero_flux_keeps_area():
    grid = build_grid(RADIAL, 1.0, 1.0 / 32)
    initial = state_of("constant 0 + gaussian-bump 0.3 0.3", grid)
    schedule = BoundarySchedule.from_initial(NONE, initial)
    trajectory = evolve(initial, schedule, 0.05)
    assert volume(trajectory.final) == pytest.approx(volume(initial), rel=1e-2)
    assert np.max(trajectory.final.u.values) < np.max(initial.u.values)


def test_zero_flux_needs_radial_grid(cartesian_disk):
    initial = state_of("constant 0", cartesian_disk)
    with pytest.raises(ConfigurationError):
        step(initial, 1e-3, BoundarySchedule.from_initial(NONE, initial))


def test_trajectory_must_start_at_zero(radial_disk):
    initial = state_of("constant 0", radial_disk)
    schedule = BoundarySchedule.from_initial(FROZEN, initial)
    later = step(initial, 1e-3, schedule)
    with pytest.raises(ConfigurationError):
        evolve(later, schedule, 0.1)
    with pytest.raises(ConfigurationError):
        evolve(initial, schedule, 0.0)


def test_divergence_halves_the_failed_step(monkeypatch):
    initial = state_of("constant 0", build_grid(RADIAL, 1.0, 0.125))
    schedule = BoundarySchedule.from_initial(FROZEN, initial)
    stepper = ImplicitStepper(DtPolicy(dt0=0.1, dt_max=0.1, grow_after=1000))
    original = ImplicitStepper.advance
    attempted = []

    def fails_above(self, state, dt, schedule, t_new=None):
        attempted.append(dt)
        if dt > 0.03:
            raise NewtonDivergenceError("step too long")
        return original(self, state, dt, schedule, t_new)

    monkeypatch.setattr(ImplicitStepper, "advance", fails_above)
    trajectory = stepper.evolve(initial, schedule, 1.0)
    # 0.1 and 0.05 are refused, and every later step keeps the halved length
    np.testing.assert_allclose(attempted[:4], [0.1, 0.05, 0.025, 0.025])
    assert max(trajectory.step_dts) <= 0.025 * (1.0 + 1e-9)
    assert trajectory.final.t == pytest.approx(1.0)


def test_infinite_ramp_is_the_complete_schedule():
    schedule = BoundarySchedule(RAMP, [1.0, 2.0], m=math.inf)
    assert schedule.form == COMPLETE
    assert schedule.closure == LAYERED
    assert schedule.log_growth(0.0) == 0.0
    assert math.isinf(schedule.log_growth(1e-6))
    np.testing.assert_array_equal(schedule.boundary_u(0.0), [1.0, 2.0])
    # held at the cap as a whole, so the boundary variation survives
    np.testing.assert_allclose(schedule.boundary_u(0.1), [LAYER_CAP - 0.5, LAYER_CAP + 0.5])
    steep = BoundarySchedule(RAMP, [1.0, 2.0], m=1e6)
    assert np.mean(steep.boundary_u(1.0)) == pytest.approx(LAYER_CAP)
    assert "m" not in schedule.describe()


def test_closure_follows_the_schedule_form():
    assert closure_of({"form": RAMP, "m": 4.0}) == LAYERED
    assert closure_of({"form": COMPLETE}) == LAYERED
    assert closure_of({"form": FROZEN}) == PLAIN
    assert closure_of({"form": FAR_FIELD, "cusp_C": 2.0}) == PLAIN
    assert closure_of(None) == PLAIN


def test_far_field_flux_matches_the_cusp():
    C, t, r, b = 2.0, 0.3, 5.0, 0.7
    u_edge = 0.5 * math.log(C * t / (r * r * (math.log(r) + b) ** 2))
    schedule = BoundarySchedule(FAR_FIELD, [0.0], cusp_C=C)
    assert not schedule.is_dirichlet
    flux, slope = schedule.far_field_flux(r, u_edge, t)
    assert flux == pytest.approx(-1.0 - 1.0 / (math.log(r) + b))
    assert slope == pytest.approx(flux + 1.0)
    with pytest.raises(BarrierDomainError):
        schedule.far_field_flux(r, u_edge, 0.0)
    with pytest.raises(ConfigurationError):
        BoundarySchedule(FAR_FIELD, [0.0], cusp_C=0.0)


def test_far_field_flow_converges_and_loses_area():
    grid = build_grid(RADIAL, 8.0, 0.125)
    initial = state_of("sphere", grid)
    schedule = BoundarySchedule.from_initial(FAR_FIELD, initial)
    trajectory = ImplicitStepper().evolve(initial, schedule, 0.3, output_times=(0.1, 0.2))
    # the flux derivative sits in the Jacobian, so Newton stays quadratic
    assert max(trajectory.newton_residuals) <= 1e-10
    assert max(trajectory.newton_iterations) <= 10
    areas = [far_field_volume(s) for s in trajectory.snapshots[1:]]
    assert all(b < a for a, b in zip(areas, areas[1:]))
    assert areas[-1] < volume(initial)
    assert np.all(np.isfinite(trajectory.final.u.values))


def test_far_field_needs_a_radial_grid(cartesian_disk):
    initial = state_of("sphere", cartesian_disk)
    schedule = BoundarySchedule.from_initial(FAR_FIELD, initial)
    with pytest.raises(ConfigurationError):
        step(initial, 1e-3, schedule)


def test_complete_flow_stays_below_the_hyperbolic_barrier(radial_disk):
    initial = state_of("hyperbolic-disk", radial_disk)
    stepper = ImplicitStepper()
    complete = stepper.evolve(initial, BoundarySchedule.from_initial(RAMP, initial, m=math.inf),
                              0.2, output_times=(0.05, 0.1))
    assert complete.final.closure == LAYERED
    assert np.all(np.isfinite(complete.u_matrix()))
    ramp = stepper.evolve(initial, BoundarySchedule.from_initial(RAMP, initial, m=16.0), 0.2,
                          output_times=(0.05, 0.1), time_plan=complete.time_plan)
    oracle = BoundOracle(tolerance=1e-2)
    # the complete flow dominates every flow with finite boundary data
    assert oracle.check_comparison(complete, ramp).verdict == PASS
    assert oracle.check_conformal_bounds(complete, "u_upper_hyp").verdict == PASS
