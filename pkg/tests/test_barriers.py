import math

import numpy as np
import pytest

from surfaceflow.lib.FlowExceptions import BarrierDomainError
from surfaceflow.fields.Grid import build_grid, RADIAL
from surfaceflow.fields.ScalarField import ScalarField
from surfaceflow.metrics.Barriers import (radius_of, barrier_hyperbolic, barrier_upper,
                                          barrier_cusp, barrier_cusp_u, barrier_eigen,
                                          barrier_curvature_growth)
from surfaceflow.operators.Eigen import first_eigenpair
from surfaceflow.operators.Laplacian import laplacian


def test_radius_of_points_and_radii():
    np.testing.assert_allclose(radius_of(np.array([[3.0, 4.0], [0.0, -2.0]])), [5.0, 2.0])
    np.testing.assert_allclose(radius_of([-0.5, 0.25]), [0.5, 0.25])


def test_hyperbolic_values():
    assert barrier_hyperbolic(0.0, 0.5) == pytest.approx(math.log(2.0))
    assert barrier_hyperbolic(0.0, 0.5, delta=1.0) == pytest.approx(0.0)
    values = barrier_hyperbolic(np.array([0.0, 0.5]), 1.0)
    assert values.shape == (2,)
    assert values[1] == pytest.approx(math.log(2.0 / 0.75) + 0.5 * math.log(2.0))


@pytest.mark.parametrize("x, t, delta", [(0.0, 0.0, 0.0), (0.0, -1.0, 0.0),
                                         (1.0, 1.0, 0.0), (1.5, 1.0, 0.25),
                                         (0.0, 1.0, -0.1)])
def test_hyperbolic_domain(x, t, delta):
    with pytest.raises(BarrierDomainError):
        barrier_hyperbolic(x, t, delta)


def _residual(n):
    grid = build_grid(RADIAL, 0.5, 0.5 / n)
    t = 0.75
    psi = barrier_hyperbolic(grid.radii, t, delta=0.1)
    lap = laplacian(ScalarField(grid, psi)).values
    return np.max(np.abs(lap - np.exp(2.0 * psi[:grid.n_interior]) / (2.0 * t)))


def test_hyperbolic_solves_elliptic_equation():
    coarse, fine = _residual(32), _residual(64)
    assert fine < 1e-2
    assert coarse / fine > 3.0


def test_upper_values():
    assert barrier_upper(0.0, 0.0) == pytest.approx(math.log(2.0))
    assert barrier_upper(0.0, 1.5) == pytest.approx(math.log(2.0) + 0.5 * math.log(4.0))
    # it is the delta = 0 barrier moved forward by half a time unit
    assert barrier_upper(0.3, 1.0) == pytest.approx(barrier_hyperbolic(0.3, 1.5))
    with pytest.raises(BarrierDomainError):
        barrier_upper(0.0, -0.1)
    with pytest.raises(BarrierDomainError):
        barrier_upper(np.array([0.5, 1.0]), 1.0)


def test_cusp_values():
    assert barrier_cusp(math.e, 1.0, 2.0) == pytest.approx(2.0 / math.e ** 2)
    assert barrier_cusp(math.e, 0.0, 2.0) == 0.0
    with pytest.raises(BarrierDomainError):
        barrier_cusp(1.0, 1.0, 2.0)
    with pytest.raises(BarrierDomainError):
        barrier_cusp(2.0, -1.0, 2.0)


@pytest.mark.parametrize("C", [0.5, 2.0, 8.0])
def test_cusp_scales_agree(C):
    rho = np.array([1.5, 3.0, 40.0])
    np.testing.assert_allclose(2.0 * barrier_cusp_u(rho, 0.7, C),
                               np.log(barrier_cusp(rho, 0.7, C)))
    with pytest.raises(BarrierDomainError):
        barrier_cusp_u(rho, 0.0, C)


def test_eigen_barrier():
    pair = first_eigenpair(build_grid(RADIAL, 1.0, 1.0 / 16))
    barrier = barrier_eigen(0.5, pair, 2.0)
    np.testing.assert_allclose(barrier.values * pair.phi.values, 1.0)
    assert barrier_eigen(0.0, pair, 2.0).max_norm() == 0.0
    with pytest.raises(BarrierDomainError):
        barrier_eigen(-1.0, pair, 2.0)
    with pytest.raises(BarrierDomainError):
        barrier_eigen(1.0, pair, 0.0)


def test_curvature_growth():
    assert barrier_curvature_growth(3.0, 0.0) == 0.0
    assert barrier_curvature_growth(0.25, 1.0) == pytest.approx(0.5 * math.log(0.5))
    # negative curvature only lets the area grow
    assert barrier_curvature_growth(1.0, -1.0) == pytest.approx(0.5 * math.log(3.0))
    np.testing.assert_allclose(barrier_curvature_growth(np.array([0.0, 0.25]), 1.0),
                               [0.0, 0.5 * math.log(0.5)])
    with pytest.raises(BarrierDomainError):
        barrier_curvature_growth(0.5, 1.0)
