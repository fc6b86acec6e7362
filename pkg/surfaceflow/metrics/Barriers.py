# -*- coding: utf-8 -*-
# Generic/Built-in
import math

import numpy as np

from ..lib.FlowExceptions import BarrierDomainError
from ..fields.ScalarField import ScalarField, INTERIOR_ONLY


def radius_of(x):
    # Accepts radii (scalar or 1-d) or points of shape (n, 2)
    x = np.asarray(x, dtype=float)
    if x.ndim == 2 and x.shape[1] == 2:
        return np.hypot(x[:, 0], x[:, 1])
    return np.abs(x)


def _out(value):
    return float(value) if np.ndim(value) == 0 else value


def barrier_hyperbolic(x, t, delta=0.0):
    """
    psi_delta(x, t) = log(2(1+delta) / ((1+delta)^2 - |x|^2)) + log(2t)/2,
    an exact solution of Δ psi = e^{2 psi} / (2t) on |x| < 1 + delta.
    delta = 0 is the completeness barrier for flows on the unit disk.
    """
    if not t > 0.0:
        raise BarrierDomainError("hyperbolic barrier needs t > 0, got {}".format(t))
    if not delta >= 0.0:
        raise BarrierDomainError("hyperbolic barrier needs delta >= 0, got {}".format(delta))
    rho = radius_of(x)
    a = 1.0 + delta
    gap = a * a - rho * rho
    if np.any(gap <= 0.0):
        raise BarrierDomainError("hyperbolic barrier undefined at |x| >= {}".format(a))
    value = np.log(2.0 * a / gap) + 0.5 * math.log(2.0 * t)
    return _out(value)


def barrier_upper(x, t):
    """log(2 / (1 - |x|^2)) + log(2t + 1) / 2, the hyperbolic solution started at t = 0."""
    if not t >= 0.0:
        raise BarrierDomainError("upper barrier needs t >= 0, got {}".format(t))
    rho = radius_of(x)
    gap = 1.0 - rho * rho
    if np.any(gap <= 0.0):
        raise BarrierDomainError("upper barrier undefined at |x| >= 1")
    value = np.log(2.0 / gap) + 0.5 * math.log(2.0 * t + 1.0)
    return _out(value)


def _cusp_radius(x):
    rho = radius_of(x)
    if np.any(rho <= 1.0):
        raise BarrierDomainError("cusp barrier undefined at |x| <= 1")
    return rho


def barrier_cusp(x, t, C):
    """Cusp lower barrier for plane flows in v-scale: C t / (|x|^2 log^2 |x|)."""
    if not t >= 0.0:
        raise BarrierDomainError("cusp barrier needs t >= 0, got {}".format(t))
    rho = _cusp_radius(x)
    value = C * t / (rho * rho * np.log(rho) ** 2)
    return _out(value)


def cusp_constant(C):
    # u-scale constant C' with 2 * (u-form) == log(v-form)
    return -0.5 * math.log(0.5 * C)


def barrier_cusp_u(x, t, C):
    """u-scale cusp barrier -C' - log(|x| log|x|) + log(2t)/2, C' = -log(C/2)/2."""
    if not t > 0.0:
        raise BarrierDomainError("u-scale cusp barrier needs t > 0, got {}".format(t))
    rho = _cusp_radius(x)
    value = -cusp_constant(C) - np.log(rho * np.log(rho)) + 0.5 * math.log(2.0 * t)
    return _out(value)


def barrier_eigen(t, pair, C):
    """Eigenfunction lower barrier C t / phi on the interior nodes."""
    if not t >= 0.0:
        raise BarrierDomainError("eigen barrier needs t >= 0, got {}".format(t))
    if not C > 0.0:
        raise BarrierDomainError("eigen barrier needs C > 0, got {}".format(C))
    phi = pair.phi
    return ScalarField(phi.grid, C * t / phi.values, INTERIOR_ONLY)


def barrier_curvature_growth(t, K0):
    """
    log(1 - 2 K0 t) / 2: how far u may drop below u0 by time t when the
    initial curvature is at most K0 (K0 >= 0, t < 1 / (2 K0)).
    """
    t = np.asarray(t, dtype=float)
    gap = 1.0 - 2.0 * K0 * t
    if np.any(gap <= 0.0):
        raise BarrierDomainError(
            "curvature growth shift undefined for t >= 1/(2 K0) with K0={}".format(K0))
    return _out(0.5 * np.log(gap))
