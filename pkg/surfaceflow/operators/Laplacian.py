# -*- coding: utf-8 -*-
# Generic/Built-in
import math

import numpy as np
import scipy.sparse as sp

from ..lib.FlowComponent import FlowComponent
from ..lib.FlowExceptions import GridMismatchError
from ..fields.ScalarField import ScalarField, ACTIVE, INTERIOR_ONLY


# Closure tags: how boundary values enter the interior Laplacian
PLAIN = "plain"
LAYERED = "layered"
CLOSURES = (PLAIN, LAYERED)

# log E is clipped here before exponentiation
LAYER_LOG_LIMIT = 600.0


def layer_depth(r, log_e):
    """
    Depth delta > 0 of the hyperbolic profile
    sigma(rho) = log(2 (r + delta) / ((r + delta)^2 - rho^2)) whose value on
    |x| = r is log_e, the root of delta^2 + (2r - 2q) delta - 2 r q = 0 with
    q = e^{-log_e}.
    """
    log_e = min(max(float(log_e), -LAYER_LOG_LIMIT), LAYER_LOG_LIMIT)
    q = math.exp(-log_e)
    b = 2.0 * r - 2.0 * q
    root = math.hypot(b, math.sqrt(8.0 * r * q))
    if b >= 0.0:
        return 4.0 * r * q / (b + root)
    return 0.5 * (root - b)


def layer_profile(rho, r, depth):
    outer = r + depth
    rho = np.asarray(rho, dtype=float)
    return math.log(2.0 * outer) - np.log(outer - rho) - np.log(outer + rho)


class LaplacianOperator(object):
    """
    Discrete Euclidean Laplacian on a disk grid, split as

        lap(f) = A @ f[interior] + B @ f[boundary]

    Radial grids use the conservative three-point form
    (r+ (f+ - f) - r- (f - f-)) / (r h^2) with the symmetry closure
    4 (f1 - f0) / h^2 at the origin; it is exact on quadratics. Cartesian
    grids use the five-point stencil with Shortley-Weller unequal arms at cut
    cells, boundary values sitting on the circle itself.
    """

    def __init__(self, grid):
        self.grid = grid
        if grid.is_radial:
            full = _radial_matrix(grid)
        else:
            full = _cartesian_matrix(grid)
        n_interior = grid.n_interior
        self.full = full
        self.A = full[:, :n_interior].tocsr()
        self.B = full[:, n_interior:].tocsr()
        # Interior rows whose stencil reaches a boundary node
        self.edge_rows = np.asarray(abs(self.B).sum(axis=1)).ravel() > 0.0
        self.abs_full = abs(full).tocsr()
        self._neumann = None

    def apply(self, interior_values, boundary_values):
        return self.A @ interior_values + self.B @ boundary_values

    def layer_forcing(self, boundary_values, t):
        """
        Boundary contribution for the layered closure at time t > 0.

        The hyperbolic profile sigma whose boundary value matches the mean
        boundary u less log(2t) / 2 is split off in the rows next to the
        boundary: there the stencil only sees u - sigma, and sigma enters
        through its exact Laplacian e^{2 sigma}. A layer thinner than a cell
        is then carried by the profile instead of the stencil, and infinite
        boundary data become the limit of a vanishing depth. Rows away from
        the boundary keep the plain stencil, so the forcing there does not
        depend on the layer depth.
        """
        grid = self.grid
        u_b = np.asarray(boundary_values, dtype=float)
        log_e = float(np.mean(u_b)) - 0.5 * math.log(2.0 * t)
        depth = layer_depth(grid.r, log_e)
        sigma = layer_profile(grid.interior_radii, grid.r, depth)
        # r + depth rounds to r for thin layers, so the edge value is taken in closed form
        sigma_b = (math.log(2.0 * (grid.r + depth)) - math.log(depth)
                   - math.log(2.0 * grid.r + depth))
        with np.errstate(over="ignore"):
            layered = self.B @ (u_b - sigma_b) + np.exp(2.0 * sigma) - self.A @ sigma
        return np.where(self.edge_rows, layered, 0.0)

    def apply_closed(self, interior_values, boundary_values, closure=PLAIN, t=0.0):
        # The layered closure only applies once the flow has started
        if closure == LAYERED and t > 0.0:
            return self.A @ interior_values + self.layer_forcing(boundary_values, t)
        return self.apply(interior_values, boundary_values)

    def apply_active(self, values):
        return self.full @ values

    def edge_volume(self):
        # Integral of rho d rho over the outer half cell [r - h/2, r]
        h = self.grid.h
        return 0.5 * (self.grid.r * h - 0.25 * h * h)

    def neumann_matrix(self):
        """
        Radial zero-flux operator over all active nodes: the boundary node
        becomes an unknown whose half cell has no outward flux.
        """
        if not self.grid.is_radial:
            raise GridMismatchError("zero-flux closure is only available on radial grids")
        if self._neumann is not None:
            return self._neumann
        grid = self.grid
        h = grid.h
        n = grid.n_active
        radius = grid.radii[-1]
        volume = self.edge_volume()
        flux = (radius - 0.5 * h) / h
        last = sp.csr_matrix(
            ([flux / volume, -flux / volume], ([0, 0], [n - 2, n - 1])), shape=(1, n))
        self._neumann = sp.vstack([self.full, last]).tocsr()
        return self._neumann


def _radial_matrix(grid):
    h = grid.h
    n_interior = grid.n_interior
    radii = grid.radii
    rows = [0, 0]
    cols = [0, 1]
    vals = [-4.0 / (h * h), 4.0 / (h * h)]
    for i in range(1, n_interior):
        r_i = radii[i]
        outer = (r_i + 0.5 * h) / (r_i * h * h)
        inner = (r_i - 0.5 * h) / (r_i * h * h)
        rows.extend([i, i, i])
        cols.extend([i - 1, i, i + 1])
        vals.extend([inner, -(inner + outer), outer])
    return sp.csr_matrix((vals, (rows, cols)), shape=(n_interior, grid.n_active))


def _cartesian_matrix(grid):
    n_interior = grid.n_interior
    arms = grid.arms
    neighbours = grid.neighbours
    h_e, h_w, h_n, h_s = arms[:, 0], arms[:, 1], arms[:, 2], arms[:, 3]
    c_e = 2.0 / (h_e * (h_e + h_w))
    c_w = 2.0 / (h_w * (h_e + h_w))
    c_n = 2.0 / (h_n * (h_n + h_s))
    c_s = 2.0 / (h_s * (h_n + h_s))
    diag = -(2.0 / (h_e * h_w) + 2.0 / (h_n * h_s))
    index = np.arange(n_interior)
    rows = np.concatenate([index] * 5)
    cols = np.concatenate([index, neighbours[:, 0], neighbours[:, 1],
                           neighbours[:, 2], neighbours[:, 3]])
    vals = np.concatenate([diag, c_e, c_w, c_n, c_s])
    return sp.csr_matrix((vals, (rows, cols)), shape=(n_interior, grid.n_active))


class OperatorCache(FlowComponent):
    # One operator per distinct grid; grids are deterministic in (kind, r, h)

    def operator(self, grid):
        key = (grid.kind, grid.r, grid.h, grid.n_active)
        return self.cached(key, lambda: LaplacianOperator(grid))


OPERATORS = OperatorCache()


def laplacian_operator(grid):
    return OPERATORS.operator(grid)


def laplacian(f, boundary_values=None):
    """
    Discrete Laplacian of f at every interior node.

    Args:
        f: ScalarField over active nodes, or over interior nodes when
            boundary_values is given
        boundary_values: ScalarField over active nodes (its boundary part is
            used) or an array with one value per boundary node; overrides the
            boundary values carried by f

    Returns:
        interior-only ScalarField
    """
    grid = f.grid
    if boundary_values is None:
        if f.support != ACTIVE:
            raise GridMismatchError("interior-only field needs boundary values")
        boundary = f.boundary
    elif isinstance(boundary_values, ScalarField):
        grid.require_same(boundary_values.grid, "boundary values")
        boundary = boundary_values.boundary
    else:
        boundary = np.asarray(boundary_values, dtype=float)
        if boundary.shape != (grid.n_boundary,):
            raise GridMismatchError("expected {} boundary values, got {}".format(
                grid.n_boundary, boundary.shape))
    operator = laplacian_operator(grid)
    return ScalarField(grid, operator.apply(f.interior, boundary), INTERIOR_ONLY)
