import math

import numpy as np
import pytest

from surfaceflow.lib.FlowExceptions import ConfigurationError, GridMismatchError
from surfaceflow.fields.Grid import (Grid, build_grid, RADIAL, CARTESIAN, INTERIOR,
                                     BOUNDARY, EXTERIOR)


def test_radial_nodes_are_uniform():
    grid = build_grid(RADIAL, 1.0, 0.25)
    assert grid.n_active == 5
    assert grid.n_interior == 4
    assert grid.n_boundary == 1
    np.testing.assert_allclose(grid.radii, [0.0, 0.25, 0.5, 0.75, 1.0])
    assert grid.node_class[-1] == BOUNDARY


@pytest.mark.parametrize("kind", [RADIAL, CARTESIAN])
def test_coarse_spacing_is_rejected(kind):
    with pytest.raises(ConfigurationError):
        build_grid(kind, 1.0, 0.3)


@pytest.mark.parametrize("kind", [RADIAL, CARTESIAN])
def test_quarter_radius_spacing_is_accepted(kind):
    grid = build_grid(kind, 1.0, 0.25)
    assert grid.h == 0.25
    assert grid.n_interior >= 1


def test_spacing_just_above_a_quarter_radius_is_rejected():
    with pytest.raises(ConfigurationError):
        build_grid(CARTESIAN, 1.0, 0.2501)


@pytest.mark.parametrize("r, h", [(0.0, 0.1), (1.0, 0.0), (1.0, -0.1)])
def test_nonpositive_sizes_are_rejected(r, h):
    with pytest.raises(ConfigurationError):
        build_grid(RADIAL, r, h)


def test_radial_needs_whole_cells():
    with pytest.raises(ConfigurationError):
        build_grid(RADIAL, 1.0, 0.15)


def test_unknown_kind():
    with pytest.raises(ConfigurationError):
        build_grid("hexagonal", 1.0, 0.1)


def test_cartesian_interior_matches_lattice_count():
    grid = build_grid(CARTESIAN, 1.0, 0.2)
    # lattice points strictly inside the unit circle: i^2 + j^2 < 25
    expected = sum(1 for i in range(-5, 6) for j in range(-5, 6) if i * i + j * j < 25)
    assert grid.n_interior == expected


def test_cartesian_boundary_nodes_sit_on_circle(cartesian_disk):
    grid = cartesian_disk
    radii = grid.radii[grid.n_interior:]
    np.testing.assert_allclose(radii, grid.r, atol=1e-9)
    assert np.all(grid.neighbours < grid.n_active)
    assert np.all(grid.arms > 0.0)
    assert np.all(grid.arms <= grid.h * (1.0 + 1e-12))


def test_cartesian_node_classes_are_ordered(cartesian_disk):
    classes = cartesian_disk.node_class
    assert np.all(classes[:cartesian_disk.n_interior] == INTERIOR)
    assert np.all(classes[cartesian_disk.n_interior:cartesian_disk.n_active] == BOUNDARY)
    assert np.all(classes[cartesian_disk.n_active:] == EXTERIOR)


def test_build_is_deterministic():
    a = build_grid(CARTESIAN, 0.8, 0.05)
    b = build_grid(CARTESIAN, 0.8, 0.05)
    assert a.same_as(b)
    np.testing.assert_array_equal(a.coords, b.coords)


def test_from_resolution():
    grid = Grid.from_resolution(RADIAL, 0.5, 16)
    assert grid.h == pytest.approx(0.5 / 16)
    assert grid.n_active == 17


def test_radial_quadrature_is_exact_for_area():
    grid = build_grid(RADIAL, 0.875, 1.0 / 64)
    assert np.sum(grid.quadrature_weights()) == pytest.approx(math.pi * 0.875 ** 2, rel=1e-12)


def test_cartesian_quadrature_covers_the_disk():
    grid = build_grid(CARTESIAN, 1.0, 0.05)
    assert np.sum(grid.quadrature_weights()) == pytest.approx(math.pi, rel=1e-2)


def test_common_nodes_on_nested_radial_grids():
    small = build_grid(RADIAL, 0.5, 0.125)
    large = build_grid(RADIAL, 1.0, 0.125)
    mine, theirs = small.common_nodes(large)
    np.testing.assert_array_equal(mine, np.arange(5))
    np.testing.assert_array_equal(theirs, np.arange(5))


def test_common_nodes_need_the_same_spacing():
    with pytest.raises(GridMismatchError):
        build_grid(RADIAL, 1.0, 0.125).common_nodes(build_grid(RADIAL, 1.0, 0.0625))


def test_restrict_onto_smaller_disk():
    large = build_grid(RADIAL, 1.0, 0.125)
    small = build_grid(RADIAL, 0.5, 0.125)
    indices, values = large.restrict(large.radii ** 2, small)
    np.testing.assert_array_equal(indices, np.arange(5))
    np.testing.assert_allclose(values, small.radii ** 2)


def test_require_same_reports_mismatch():
    with pytest.raises(GridMismatchError):
        build_grid(RADIAL, 1.0, 0.125).require_same(build_grid(RADIAL, 0.5, 0.125))


def test_distance_to_boundary(radial_disk):
    distance = radial_disk.distance_to_boundary()
    assert distance[0] == pytest.approx(0.875)
    assert distance[-1] == 0.0
