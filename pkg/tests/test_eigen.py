import math

import numpy as np
import pytest

from surfaceflow.lib.FlowExceptions import EigenNonConvergenceError
from surfaceflow.fields.Grid import build_grid, RADIAL, CARTESIAN
from surfaceflow.operators.Eigen import first_eigenpair

# Square of the first zero of J0
J01_SQUARED = 5.783185962946784


def test_unit_disk_eigenvalue():
    pair = first_eigenpair(build_grid(RADIAL, 1.0, 1.0 / 64))
    assert pair.lambda1 == pytest.approx(J01_SQUARED, abs=1e-2)
    assert pair.residual <= 1e-10


def test_cartesian_unit_disk_eigenvalue():
    pair = first_eigenpair(build_grid(CARTESIAN, 1.0, 1.0 / 32))
    assert pair.lambda1 == pytest.approx(J01_SQUARED, rel=2e-2)


def test_eigenvalue_scales_with_inverse_square_radius():
    unit = first_eigenpair(build_grid(RADIAL, 1.0, 1.0 / 64))
    half = first_eigenpair(build_grid(RADIAL, 0.5, 1.0 / 128))
    assert half.lambda1 == pytest.approx(4.0 * unit.lambda1, rel=1e-9)


def test_eigenvalue_converges_at_second_order():
    values = [first_eigenpair(build_grid(RADIAL, 1.0, 1.0 / n)).lambda1 for n in (32, 64, 128)]
    order = math.log2(abs(values[0] - values[1]) / abs(values[1] - values[2]))
    assert order >= 1.8


@pytest.mark.parametrize("kind", [RADIAL, CARTESIAN])
def test_eigenfunction_is_positive_and_normalised(kind):
    grid = build_grid(kind, 1.0, 1.0 / 16)
    pair = first_eigenpair(grid)
    weights = grid.quadrature_weights()[:grid.n_interior]
    assert np.all(pair.phi.values > 0.0)
    assert np.dot(weights, pair.phi.values ** 2) == pytest.approx(1.0)


def test_iteration_budget():
    with pytest.raises(EigenNonConvergenceError):
        first_eigenpair(build_grid(RADIAL, 1.0, 1.0 / 16), tol=1e-14, max_iter=1)


def test_richardson_extrapolation_hits_the_bessel_zero():
    coarse = first_eigenpair(build_grid(RADIAL, 1.0, 1.0 / 128)).lambda1
    fine = first_eigenpair(build_grid(RADIAL, 1.0, 1.0 / 256)).lambda1
    assert fine == pytest.approx(J01_SQUARED, rel=5e-3)
    extrapolated = (4.0 * fine - coarse) / 3.0
    assert extrapolated == pytest.approx(J01_SQUARED, abs=1e-4)
    # refining moves the eigenvalue towards the continuum value
    assert abs(fine - J01_SQUARED) < abs(coarse - J01_SQUARED)
