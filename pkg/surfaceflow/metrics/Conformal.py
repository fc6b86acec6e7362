# -*- coding: utf-8 -*-
# Generic/Built-in
import math

import numpy as np
from scipy.integrate import trapezoid

from ..lib.FlowExceptions import BarrierDomainError, GridMismatchError
from ..fields.Grid import RADIAL
from ..fields.ScalarField import ScalarField, ACTIVE, INTERIOR_ONLY
from ..operators.Laplacian import laplacian_operator, PLAIN, CLOSURES

# Default constant of the cusp tail added to truncated plane volumes
CUSP_C = 2.0


class ConformalState(object):
    """
    The metric e^{2u} dx^2 at solver time t.

    ``time_offset`` shifts solver time to the physical time the bounds are
    stated in (t_phys = t + time_offset); soliton runs start at t_phys = 1/2.
    ``closure`` says how the boundary values enter the interior Laplacian:
    plain stencils, or the layered closure of ramp and complete data.
    """

    def __init__(self, t, u, time_offset=0.0, closure=PLAIN):
        if not t >= 0.0:
            raise GridMismatchError("state time must be >= 0, got {}".format(t))
        if u.support != ACTIVE:
            raise GridMismatchError("a conformal state needs u on every active node")
        if closure not in CLOSURES:
            raise GridMismatchError("unknown closure {}".format(closure))
        self.t = float(t)
        self.u = u
        self.time_offset = float(time_offset)
        self.closure = closure

    @property
    def grid(self):
        return self.u.grid

    @property
    def physical_time(self):
        return self.t + self.time_offset

    @property
    def v(self):
        return np.exp(2.0 * self.u.values)

    def advanced(self, t, values, closure=None):
        return ConformalState(t, self.u.with_values(values), self.time_offset,
                              self.closure if closure is None else closure)

    def __repr__(self):
        return "ConformalState(t={}, {})".format(self.t, self.grid)


def scaled_laplacian(state):
    # s = e^{-2u} Δ_h u; curvature and pressure are both read off s
    grid = state.grid
    u = state.u.values
    operator = laplacian_operator(grid)
    lap = operator.apply_closed(u[:grid.n_interior], u[grid.n_interior:], state.closure,
                                state.t)
    return np.exp(-2.0 * u[:grid.n_interior]) * lap


def curvature(state):
    """Gauss curvature K = -e^{-2u} Δ_h u at the interior nodes."""
    return ScalarField(state.grid, -scaled_laplacian(state), INTERIOR_ONLY)


def pressure(state):
    """
    Pressure p = v_t / v = Δ_h log v / v = 2 e^{-2u} Δ_h u at the interior
    nodes. Computed from the same scaled Laplacian as curvature so that
    p + 2K vanishes identically.
    """
    return ScalarField(state.grid, 2.0 * scaled_laplacian(state), INTERIOR_ONLY)


def volume(state, region=None):
    """
    Area of the metric, sum of w_i e^{2 u_i} over the active nodes.

    Args:
        state: ConformalState
        region: optional boolean mask over the active nodes

    Returns:
        float
    """
    weights = state.grid.quadrature_weights()
    v = state.v
    if region is not None:
        region = np.asarray(region, dtype=bool)
        if region.shape != v.shape:
            raise GridMismatchError("region mask does not match {}".format(state.grid))
        return float(np.sum(weights[region] * v[region]))
    return float(np.sum(weights * v))


def disk_volume(state, r_cut):
    """
    Area of the metric inside |x| <= r_cut.

    On radial grids the integrand 2 pi rho v is integrated by the trapezoid
    rule up to r_cut, so a node sitting on r_cut carries half its cell and an
    r_cut between nodes is reached by linear interpolation. Cartesian grids
    fall back to the nodes with |x| <= r_cut.
    """
    grid = state.grid
    if not 0.0 < r_cut <= grid.r * (1.0 + 1e-12):
        raise BarrierDomainError("r_cut={} is outside the grid radius {}".format(r_cut, grid.r))
    radii = grid.radii
    if grid.kind != RADIAL:
        return volume(state, radii <= r_cut * (1.0 + 1e-12))
    v = state.v
    inside = radii < r_cut * (1.0 - 1e-12)
    rho = np.append(radii[inside], r_cut)
    edge = np.interp(r_cut, radii, v)
    integrand = 2.0 * math.pi * rho * np.append(v[inside], edge)
    return float(trapezoid(integrand, rho))


def cusp_tail(t, r_cut, C=CUSP_C):
    # Area of C t / (|x|^2 log^2 |x|) outside |x| = r_cut
    if not r_cut > 1.0:
        raise BarrierDomainError("cusp tail needs r_cut > 1, got {}".format(r_cut))
    return 2.0 * math.pi * C * t / math.log(r_cut)


def plane_volume(state, r_cut, C=CUSP_C):
    """
    Area of a plane flow from a truncated grid: quadrature over |x| <= r_cut
    plus the analytic cusp tail beyond it.
    """
    return disk_volume(state, r_cut) + cusp_tail(state.physical_time, r_cut, C)


def matched_tail(t, radius, v_edge, C=CUSP_C):
    # Area beyond |x| = radius of the cusp C t / (|x|^2 (log|x| + b)^2), b chosen to hit v_edge
    return 2.0 * math.pi * radius * math.sqrt(C * t * max(float(v_edge), 0.0))


def far_field_volume(state, C=CUSP_C):
    """
    Area of a plane flow computed on B_R with the far-field closure: the
    whole grid plus the matched cusp tail beyond R.
    """
    grid = state.grid
    if grid.kind != RADIAL:
        raise GridMismatchError("far-field areas need a radial grid")
    return volume(state) + matched_tail(state.physical_time, grid.r, state.v[-1], C)
