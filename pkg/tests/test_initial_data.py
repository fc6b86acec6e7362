import math

import numpy as np
import pytest

from surfaceflow.lib.FlowExceptions import (ConfigurationError, GridMismatchError,
                                             SingularEvaluationError)
from surfaceflow.fields.Grid import build_grid, RADIAL, CARTESIAN
from surfaceflow.fields.InitialData import InitialData, evaluate
from surfaceflow.fields.ScalarField import ScalarField, INTERIOR_ONLY


@pytest.mark.parametrize("kind", [RADIAL, CARTESIAN])
def test_constant_zero(kind):
    field = evaluate("constant 0", build_grid(kind, 1.0, 0.125))
    assert field.max_norm() == 0.0


def test_hyperbolic_at_origin(radial_disk):
    field = evaluate("hyperbolic-disk", radial_disk)
    assert field.values[0] == pytest.approx(math.log(2.0))


def test_sphere_on_unit_circle(unit_radial):
    field = evaluate("sphere", unit_radial)
    # v0 = 4 / (1 + 1)^2 = 1 on |x| = 1
    assert field.values[-1] == pytest.approx(0.0, abs=1e-14)


def test_hyperbolic_is_singular_on_unit_circle(unit_radial):
    with pytest.raises(SingularEvaluationError):
        evaluate("hyperbolic-disk", unit_radial)


def test_scaled_hyperbolic_is_smooth_on_unit_disk(unit_radial):
    field = evaluate("scaled-hyperbolic 1.2", unit_radial)
    expected = np.log(2.4 / (1.44 - unit_radial.radii ** 2))
    np.testing.assert_allclose(field.values, expected)


@pytest.mark.parametrize("a", [1.0, 0.5])
def test_scaled_hyperbolic_needs_a_above_one(a):
    with pytest.raises(ConfigurationError):
        InitialData("scaled-hyperbolic", a=a)


def test_scale_multiplies_v(unit_radial):
    plain = evaluate("sphere", unit_radial)
    doubled = evaluate("sphere * 2", unit_radial)
    np.testing.assert_allclose(np.exp(2.0 * doubled.values), 2.0 * np.exp(2.0 * plain.values))


def test_bump_adds_amplitude_at_centre(unit_radial):
    field = evaluate("constant 0 + gaussian-bump 0.2 0.4", unit_radial)
    assert field.values[0] == pytest.approx(0.2)
    assert field.values[-1] == pytest.approx(0.2 * math.exp(-1.0 / 0.16))


def test_bump_centre_follows_seed():
    grid = build_grid(CARTESIAN, 1.0, 0.1)
    data = InitialData("constant", bump_amplitude=0.1, bump_width=0.3)
    assert data.centre_for(grid, seed=7) == data.centre_for(grid, seed=7)
    assert np.hypot(*data.centre_for(grid, seed=7)) <= 0.3


def test_radial_grids_reject_offset_bumps(unit_radial):
    data = InitialData("constant", bump_amplitude=0.1, bump_width=0.3, bump_centre=(0.2, 0.0))
    with pytest.raises(ConfigurationError):
        data.evaluate(unit_radial)


@pytest.mark.parametrize("text", ["", "torus", "constant 0 + ripple 1 2"])
def test_bad_expressions(text):
    with pytest.raises(ConfigurationError):
        InitialData.from_string(text)


def test_table_form_matches_expression():
    table = {"form": "constant", "c": 0.0, "bump": {"amplitude": 0.2, "width": 0.4}}
    assert InitialData.from_dict(table).to_dict() == \
        InitialData.from_string("constant 0 + gaussian-bump 0.2 0.4").to_dict()


def test_unknown_table_keys():
    with pytest.raises(ConfigurationError):
        InitialData.from_dict({"form": "sphere", "radius": 2.0})


@pytest.mark.parametrize("text, K", [
    ("constant 1", 0.0),
    ("hyperbolic-disk", -1.0),
    ("scaled-hyperbolic 1.5", -1.0),
    ("sphere", 1.0),
    ("sphere * 2", 0.5),
])
def test_constant_curvature_of_forms(text, K):
    assert InitialData.from_string(text).constant_curvature == pytest.approx(K)


def test_plane_properties():
    assert InitialData("sphere").finite_plane_area
    assert not InitialData("constant").finite_plane_area
    assert not InitialData("hyperbolic-disk").defined_on_plane


def test_fields_hold_only_finite_values(unit_radial):
    with pytest.raises(SingularEvaluationError):
        ScalarField(unit_radial, np.full(unit_radial.n_active, np.inf))


def test_interior_only_field_has_no_boundary(unit_radial):
    field = ScalarField(unit_radial, np.zeros(unit_radial.n_interior), INTERIOR_ONLY)
    with pytest.raises(GridMismatchError):
        field.boundary
