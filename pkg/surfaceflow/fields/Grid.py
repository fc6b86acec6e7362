# -*- coding: utf-8 -*-
# Generic/Built-in
import logging
import math

import numpy as np

from ..lib.FlowExceptions import ConfigurationError, GridMismatchError

RADIAL = "radial-1d"
CARTESIAN = "cartesian-masked-disk"
GRID_KINDS = (RADIAL, CARTESIAN)

INTERIOR = 0
BOUNDARY = 1
EXTERIOR = 2

# Shortley-Weller arm order for cartesian interior nodes
DIRECTIONS = ((1, 0), (-1, 0), (0, 1), (0, -1))

# Sub-cell samples per axis used to clip cut cells against the disk
CUT_CELL_SAMPLES = 16

_log = logging.getLogger(__name__)


class Grid(object):
    """
    Disk grid: either the radial line [0, r] or the lattice hZ^2 masked
    to the open disk |x| < r.

    Nodes are ordered interior first, then boundary, then exterior, so a
    field over the active (non-exterior) nodes is a plain prefix array and
    ``values[:n_interior]`` is its interior part.

    Parameters:
        kind (str): RADIAL or CARTESIAN
        r (float): disk radius
        h (float): spacing
        coords (ndarray): (n_nodes, 2) node positions; radial nodes sit on
            the positive x axis
        node_class (ndarray): INTERIOR / BOUNDARY / EXTERIOR per node
        neighbours (ndarray): cartesian only, (n_interior, 4) active index of
            the E, W, N, S stencil neighbour
        arms (ndarray): cartesian only, (n_interior, 4) distance to that
            neighbour (h, or the cut length to the circle)
    """

    def __init__(self, kind, r, h, coords, node_class, neighbours=None,
                 arms=None):
        self.kind = kind
        self.r = float(r)
        self.h = float(h)
        self.coords = coords
        self.node_class = node_class
        self.neighbours = neighbours
        self.arms = arms
        self.n_interior = int(np.sum(node_class == INTERIOR))
        self.n_boundary = int(np.sum(node_class == BOUNDARY))
        self.n_active = self.n_interior + self.n_boundary
        for array in (coords, node_class, neighbours, arms):
            if array is not None:
                array.setflags(write=False)
        self._weights = None

    @classmethod
    def from_resolution(cls, kind, r, n):
        return build_grid(kind, r, float(r) / int(n))

    @property
    def is_radial(self):
        return self.kind == RADIAL

    @property
    def points(self):
        # Positions of the active nodes
        return self.coords[:self.n_active]

    @property
    def radii(self):
        # |x| of the active nodes
        return np.hypot(self.points[:, 0], self.points[:, 1])

    @property
    def interior_radii(self):
        return self.radii[:self.n_interior]

    def describe(self):
        return {"kind": self.kind, "r": self.r, "h": self.h}

    def same_as(self, other):
        return (self.kind == other.kind and self.r == other.r
                and self.h == other.h and self.n_active == other.n_active)

    def require_same(self, other, what="field"):
        if not self.same_as(other):
            raise GridMismatchError(
                "{} lives on {} but {} was expected".format(
                    what, other.describe(), self.describe()))

    def distance_to_boundary(self):
        # Distance of each active node to the circle |x| = r
        return np.maximum(self.r - self.radii, 0.0)

    def quadrature_weights(self):
        """
        Area weights of the active nodes.

        Radial grids use the trapezoid rule in r with the 2*pi*r Jacobian.
        Cartesian grids give every lattice cell its area clipped to the disk;
        the clipped slivers of cells owned by lattice points outside the
        disk are credited to the nearest boundary node.
        """
        if self._weights is None:
            if self.is_radial:
                weights = _radial_weights(self)
            else:
                weights = _cartesian_weights(self)
            weights.setflags(write=False)
            self._weights = weights
        return self._weights

    def lattice_keys(self):
        # Integer lattice coordinates of active nodes sitting on hZ^2,
        # None for cut-cell boundary nodes that do not
        q = self.points / self.h
        rounded = np.rint(q)
        on_lattice = np.all(np.abs(q - rounded) < 1e-6, axis=1)
        keys = []
        for i in range(self.n_active):
            if on_lattice[i]:
                keys.append((int(rounded[i, 0]), int(rounded[i, 1])))
            else:
                keys.append(None)
        return keys

    def common_nodes(self, other):
        """
        Index pairs (mine, theirs) of active nodes both grids share.

        Both grids must use the same spacing so that their lattices (or
        radial node sets) nest exactly.
        """
        if self.kind != other.kind or abs(self.h - other.h) > 1e-12 * self.h:
            raise GridMismatchError(
                "grids {} and {} do not share a lattice".format(
                    self.describe(), other.describe()))
        theirs = {}
        for index, key in enumerate(other.lattice_keys()):
            if key is not None:
                theirs[key] = index
        mine_idx = []
        their_idx = []
        for index, key in enumerate(self.lattice_keys()):
            if key is not None and key in theirs:
                mine_idx.append(index)
                their_idx.append(theirs[key])
        return np.array(mine_idx, dtype=int), np.array(their_idx, dtype=int)

    def restrict(self, values, other):
        # (indices on other, values there) for an active-node array on this grid
        mine, theirs = self.common_nodes(other)
        return theirs, np.asarray(values)[mine]

    def __repr__(self):
        return "Grid({}, r={}, h={}, interior={}, boundary={})".format(
            self.kind, self.r, self.h, self.n_interior, self.n_boundary)


def build_grid(kind, r, h):
    """
    Build a disk grid.

    Args:
        kind: RADIAL or CARTESIAN. (str)
        r: disk radius, > 0. (float)
        h: spacing, 0 < h <= r/4. Radial grids also need r/h integral so
            node radii are exactly i*h. (float)

    Returns:
        Grid
    """
    if kind not in GRID_KINDS:
        raise ConfigurationError("unknown grid kind {}".format(kind))
    r = float(r)
    h = float(h)
    if not (r > 0.0 and math.isfinite(r)):
        raise ConfigurationError("grid radius must be positive, got {}".format(r))
    if not (h > 0.0):
        raise ConfigurationError("grid spacing must be positive, got {}".format(h))
    if h > r / 4.0 * (1.0 + 1e-12):
        raise ConfigurationError(
            "spacing h={} is too coarse for radius r={} (need h <= r/4)".format(h, r))
    if kind == RADIAL:
        return _build_radial(r, h)
    return _build_cartesian(r, h)


def _build_radial(r, h):
    n = r / h
    n_cells = int(round(n))
    if abs(n - n_cells) > 1e-9 * max(1.0, n):
        raise ConfigurationError(
            "radial grids need r/h integral, got r={} h={}".format(r, h))
    radii = np.arange(n_cells + 1, dtype=float) * h
    coords = np.zeros((n_cells + 1, 2))
    coords[:, 0] = radii
    node_class = np.full(n_cells + 1, INTERIOR, dtype=np.int8)
    node_class[-1] = BOUNDARY
    _log.debug("radial grid r={} h={} with {} nodes".format(r, h, n_cells + 1))
    return Grid(RADIAL, r, h, coords, node_class)


def _build_cartesian(r, h):
    m = int(math.floor(r / h)) + 1
    ticks = np.arange(-m, m + 1)
    ii, jj = np.meshgrid(ticks, ticks, indexing="ij")
    ii = ii.ravel()
    jj = jj.ravel()
    x = ii * h
    y = jj * h
    inside = x * x + y * y < r * r * (1.0 - 1e-12)

    interior_ij = np.stack([ii[inside], jj[inside]], axis=1)
    n_interior = interior_ij.shape[0]
    index_of = {}
    for index, (i, j) in enumerate(interior_ij):
        index_of[(int(i), int(j))] = index

    neighbours = np.zeros((n_interior, 4), dtype=int)
    arms = np.full((n_interior, 4), h)
    boundary_points = []
    boundary_index = {}

    for index, (i, j) in enumerate(interior_ij):
        px = i * h
        py = j * h
        for d, (di, dj) in enumerate(DIRECTIONS):
            key = (int(i + di), int(j + dj))
            found = index_of.get(key)
            if found is not None:
                neighbours[index, d] = found
                continue
            # Cut arm: walk from the node to the circle along the axis
            if di != 0:
                reach = math.sqrt(max(r * r - py * py, 0.0))
                arm = reach - di * px
            else:
                reach = math.sqrt(max(r * r - px * px, 0.0))
                arm = reach - dj * py
            arm = min(max(arm, 0.0), h)
            if arm >= h * (1.0 - 1e-9):
                arm = h
                point = (key[0] * h, key[1] * h)
            else:
                point = (px + di * arm, py + dj * arm)
            point_key = (round(point[0] / h, 9), round(point[1] / h, 9))
            b = boundary_index.get(point_key)
            if b is None:
                b = len(boundary_points)
                boundary_index[point_key] = b
                boundary_points.append(point)
            neighbours[index, d] = n_interior + b
            arms[index, d] = arm

    lattice_on_boundary = set()
    for point in boundary_points:
        q = (point[0] / h, point[1] / h)
        if abs(q[0] - round(q[0])) < 1e-9 and abs(q[1] - round(q[1])) < 1e-9:
            lattice_on_boundary.add((int(round(q[0])), int(round(q[1]))))

    exterior = []
    for i, j, is_in in zip(ii, jj, inside):
        if not is_in and (int(i), int(j)) not in lattice_on_boundary:
            exterior.append((i * h, j * h))

    coords = np.zeros((n_interior + len(boundary_points) + len(exterior), 2))
    coords[:n_interior] = interior_ij * h
    if boundary_points:
        coords[n_interior:n_interior + len(boundary_points)] = np.array(boundary_points)
    if exterior:
        coords[n_interior + len(boundary_points):] = np.array(exterior)
    node_class = np.full(coords.shape[0], EXTERIOR, dtype=np.int8)
    node_class[:n_interior] = INTERIOR
    node_class[n_interior:n_interior + len(boundary_points)] = BOUNDARY
    _log.debug("cartesian grid r={} h={}: {} interior, {} boundary".format(
        r, h, n_interior, len(boundary_points)))
    return Grid(CARTESIAN, r, h, coords, node_class, neighbours, arms)


def _radial_weights(grid):
    radii = grid.radii
    weights = 2.0 * math.pi * radii * grid.h
    weights[0] = 0.0
    weights[-1] *= 0.5
    return weights


def _cartesian_weights(grid):
    h = grid.h
    r = grid.r
    weights = np.zeros(grid.n_active)
    offsets = (np.arange(CUT_CELL_SAMPLES) + 0.5) / CUT_CELL_SAMPLES - 0.5
    sx, sy = np.meshgrid(offsets * h, offsets * h, indexing="ij")
    sx = sx.ravel()
    sy = sy.ravel()
    half_diag = h / math.sqrt(2.0)

    def clipped_area(cx, cy):
        dist = np.hypot(cx, cy)
        area = np.where(dist + half_diag <= r, h * h, 0.0)
        cut = np.flatnonzero((dist + half_diag > r) & (dist - half_diag < r))
        for k in cut:
            hits = np.count_nonzero((cx[k] + sx) ** 2 + (cy[k] + sy) ** 2 < r * r)
            area[k] = h * h * hits / sx.size
        return area

    interior = grid.coords[:grid.n_interior]
    weights[:grid.n_interior] = clipped_area(interior[:, 0], interior[:, 1])

    # Lattice points outside the open disk whose cells still reach into it
    m = int(math.floor(r / h)) + 2
    ticks = np.arange(-m, m + 1) * h
    gx, gy = np.meshgrid(ticks, ticks, indexing="ij")
    gx = gx.ravel()
    gy = gy.ravel()
    dist = np.hypot(gx, gy)
    outside = (gx * gx + gy * gy >= r * r * (1.0 - 1e-12)) & (dist - half_diag < r)
    ox = gx[outside]
    oy = gy[outside]
    slivers = clipped_area(ox, oy)
    boundary = grid.coords[grid.n_interior:grid.n_active]
    if boundary.shape[0] > 0:
        for k in np.flatnonzero(slivers > 0.0):
            d2 = (boundary[:, 0] - ox[k]) ** 2 + (boundary[:, 1] - oy[k]) ** 2
            weights[grid.n_interior + int(np.argmin(d2))] += slivers[k]
    return weights
