import pytest

from surfaceflow.lib.FlowExceptions import ConfigurationError
from surfaceflow.fields.Grid import RADIAL
from surfaceflow.stepper.Stepper import DtPolicy
from surfaceflow.stepper.Trajectory import FlowTrajectory
from surfaceflow.oracle.Calibration import (Tolerance, CalibrationSpec, calibrate,
                                            soliton_trajectory, soliton_defect,
                                            SOLITON_OFFSET)


def test_epsilon_and_floor():
    tolerance = Tolerance(c1=2.0, c2=0.5, safety=2.0, floor=1e-9)
    assert tolerance.epsilon(0.1, 0.01) == pytest.approx(2.0 * (0.02 + 0.005))
    assert Tolerance(0.0, 0.0, floor=1e-9).epsilon(0.1, 0.01) == 1e-9
    assert Tolerance.from_dict(tolerance.to_dict()) == tolerance


def test_refinements_separate_space_and_time():
    spec = CalibrationSpec(n=16, dt_max=0.01)
    assert spec.refinements() == [(16, 0.01), (32, 0.01), (16, 0.0025),
                                  (32, 0.0025)]


def test_soliton_starts_at_half():
    trajectory = soliton_trajectory(RADIAL, 0.875, 8, DtPolicy(), 0.1)
    assert trajectory.time_offset == SOLITON_OFFSET
    assert trajectory.schedule["kappa"] == -1.0
    assert 0.0 < soliton_defect(trajectory) < 0.5


def test_calibrate_small():
    spec = CalibrationSpec(radius=0.875, n=8, t_end=0.1)
    policy = DtPolicy()
    tolerance = calibrate(spec, policy)
    assert tolerance.c1 >= 0.0 and tolerance.c2 >= 0.0
    assert tolerance.floor == pytest.approx(10.0 * policy.newton_tol)
    assert [s["h"] for s in tolerance.samples] == pytest.approx(
        [0.109375, 0.0546875, 0.109375, 0.0546875])
    assert [s["dt_max"] for s in tolerance.samples] == pytest.approx([0.01, 0.01, 0.0025, 0.0025])
    assert tolerance.epsilon(0.109375, 0.01) > 0.0


def test_calibrate_needs_a_grid():
    with pytest.raises(ConfigurationError):
        calibrate(CalibrationSpec(n=2))


def test_defect_sees_the_step_length():
    coarse = soliton_trajectory(RADIAL, 0.875, 8, DtPolicy(dt0=0.01, dt_max=0.01), 0.1)
    fine = soliton_trajectory(RADIAL, 0.875, 8, DtPolicy(dt0=0.0025, dt_max=0.0025), 0.1)
    assert max(coarse.step_dts) == pytest.approx(0.01)
    assert max(fine.step_dts) == pytest.approx(0.0025)
    assert soliton_defect(coarse) != pytest.approx(soliton_defect(fine), rel=1e-6)


def test_defect_skips_the_initial_snapshot():
    trajectory = soliton_trajectory(RADIAL, 0.875, 8, DtPolicy(dt0=0.01, dt_max=0.01), 0.1)
    alone = FlowTrajectory(trajectory.snapshots[:1], schedule=trajectory.schedule)
    assert soliton_defect(alone) == 0.0


def test_wider_exclusion_never_raises_the_defect():
    trajectory = soliton_trajectory(RADIAL, 0.875, 16, DtPolicy(dt0=0.01, dt_max=0.01), 0.1)
    assert soliton_defect(trajectory, 4.0) <= soliton_defect(trajectory, 2.0)
