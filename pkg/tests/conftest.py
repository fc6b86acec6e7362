import math

import numpy as np
import pytest

from surfaceflow.fields.Grid import build_grid, RADIAL, CARTESIAN
from surfaceflow.fields.InitialData import InitialData
from surfaceflow.metrics.Conformal import ConformalState


def hyperbolic_u(rho, t=0.0):
    # Exact hyperbolic flow started from log(2 / (1 - |x|^2)) at t = 0
    rho = np.asarray(rho, dtype=float)
    return np.log(2.0 / (1.0 - rho * rho)) + 0.5 * math.log(1.0 + 2.0 * t)


def state_of(data, grid, t=0.0, time_offset=0.0):
    if isinstance(data, str):
        data = InitialData.from_string(data)
    return ConformalState(t, data.evaluate(grid), time_offset)


@pytest.fixture
def radial_disk():
    # B_{7/8} with h = 1/32
    return build_grid(RADIAL, 0.875, 1.0 / 32.0)


@pytest.fixture
def unit_radial():
    return build_grid(RADIAL, 1.0, 1.0 / 32.0)


@pytest.fixture
def cartesian_disk():
    return build_grid(CARTESIAN, 1.0, 0.1)


def small_scenario(**overrides):
    # A scenario small enough to run inside a unit test
    from surfaceflow.cli.Scenario import Scenario
    values = dict(name="small", initial=InitialData("constant"), n=16, t_end=0.2,
                  snapshot_interval=0.1, probe_times=(0.1, 0.2), m_final=16.0, checks=())
    values.update(overrides)
    if isinstance(values["initial"], str):
        values["initial"] = InitialData.from_string(values["initial"])
    return Scenario(**values).sealed()
