# -*- coding: utf-8 -*-
# Generic/Built-in
import math

import numpy as np

from ..lib.FlowExceptions import ConfigurationError, BarrierDomainError
from ..operators.Laplacian import PLAIN, LAYERED
from ..metrics.Conformal import CUSP_C

RAMP = "ramp"
COMPLETE = "complete"
FROZEN = "frozen"
CURVATURE_SCALING = "curvature-scaling"
NONE = "none"
FAR_FIELD = "far-field"
SCHEDULE_FORMS = (RAMP, COMPLETE, FROZEN, CURVATURE_SCALING, NONE, FAR_FIELD)

# Forms whose boundary values enter through the layered closure
LAYERED_FORMS = (RAMP, COMPLETE)

# Boundary u is held at or below this mean; e^{2u} stays inside double range
# and the layer depth it implies is far below any grid spacing
LAYER_CAP = 300.0


def closure_of(description):
    """Closure tag of the states produced under a described schedule."""
    return LAYERED if dict(description or {}).get("form") in LAYERED_FORMS else PLAIN


class BoundarySchedule(object):
    """
    Boundary data of a flow as a function of time.

    Forms:
        ramp:              v = v0 e^{m t^2 + 2 t}; m = inf is the complete form
        complete:          v = infinity on the boundary, held at LAYER_CAP
        frozen:            v = v0
        curvature-scaling: v = v0 (1 - 2 kappa t), the exact flow of data with
                           constant curvature kappa
        none:              no Dirichlet data; zero-flux closure (radial only)
        far-field:         no Dirichlet data; the outward flux of log v is that
                           of the cusp C t / (r^2 (log r + b)^2) through the
                           edge value, r d_r log v = -2 - 2 sqrt(r^2 v / C t)
                           (radial only)

    ``time_scale`` evaluates the schedule at time_scale * t, which is how the
    parabolically rescaled problem v(a x, a^2 t) sees the same boundary data.
    Values are kept in log form (u_b = log(v_b) / 2) so steep ramps do not
    overflow before they are needed; ramp and complete data are capped at a
    mean of LAYER_CAP and enter the interior through the layered closure.
    """

    def __init__(self, form, base_u, m=0.0, kappa=0.0, time_scale=1.0, cusp_C=CUSP_C):
        if form == RAMP and math.isinf(m) and m > 0.0:
            form = COMPLETE
        if form not in SCHEDULE_FORMS:
            raise ConfigurationError("unknown boundary schedule {}".format(form))
        if form == RAMP and not m >= 0.0:
            raise ConfigurationError("ramp needs m >= 0, got {}".format(m))
        if not time_scale > 0.0:
            raise ConfigurationError("time scale must be positive")
        if not cusp_C > 0.0:
            raise ConfigurationError("cusp constant must be positive, got {}".format(cusp_C))
        self.form = form
        self.base_u = np.array(base_u, dtype=float)
        self.base_u.setflags(write=False)
        self.m = math.inf if form == COMPLETE else float(m)
        self.kappa = float(kappa)
        self.time_scale = float(time_scale)
        self.cusp_C = float(cusp_C)

    @classmethod
    def from_initial(cls, form, initial, m=0.0, kappa=0.0, time_scale=1.0, cusp_C=CUSP_C):
        # Base values are the boundary part of the initial u field
        return cls(form, initial.u.boundary, m, kappa, time_scale, cusp_C)

    @property
    def is_dirichlet(self):
        return self.form not in (NONE, FAR_FIELD)

    @property
    def closure(self):
        return LAYERED if self.form in LAYERED_FORMS else PLAIN

    def log_growth(self, t):
        # log(v_b(t) / v0)
        tau = self.time_scale * t
        if self.form == RAMP:
            return self.m * tau * tau + 2.0 * tau
        if self.form == COMPLETE:
            return math.inf if tau > 0.0 else 0.0
        if self.form == CURVATURE_SCALING:
            factor = 1.0 - 2.0 * self.kappa * tau
            if factor <= 0.0:
                raise BarrierDomainError(
                    "curvature-scaling data vanish at t={} for kappa={}".format(t, self.kappa))
            return math.log(factor)
        return 0.0

    def boundary_u(self, t):
        growth = self.log_growth(t)
        if self.form not in LAYERED_FORMS or self.base_u.size == 0:
            return self.base_u + 0.5 * growth
        # Shift down to the cap as a whole so boundary variations survive
        mean = float(np.mean(self.base_u))
        level = min(mean + 0.5 * growth, LAYER_CAP)
        return self.base_u - mean + level

    def boundary_v(self, t):
        return np.exp(2.0 * self.boundary_u(t))

    def far_field_flux(self, radius, u_edge, t):
        """
        Outward flux r d_r u = -1 - r e^u / sqrt(C t) at |x| = radius of the
        matched cusp, and its derivative in the edge value u_edge, at
        physical time t > 0.
        """
        if not t > 0.0:
            raise BarrierDomainError("far-field flux needs t > 0, got {}".format(t))
        growth = radius * float(np.exp(u_edge)) / math.sqrt(self.cusp_C * t)
        return -1.0 - growth, -growth

    def describe(self):
        out = {"form": self.form, "time_scale": self.time_scale}
        if self.form == RAMP:
            out["m"] = self.m
        if self.form == CURVATURE_SCALING:
            out["kappa"] = self.kappa
        if self.form == FAR_FIELD:
            out["cusp_C"] = self.cusp_C
        return out

    def __repr__(self):
        return "BoundarySchedule({})".format(self.describe())
