# -*- coding: utf-8 -*-
# Generic/Built-in
import logging
import math

import numpy as np

from ..lib.FlowExceptions import ConfigurationError, SingularEvaluationError
from .ScalarField import ScalarField

CONSTANT = "constant"
HYPERBOLIC_DISK = "hyperbolic-disk"
SCALED_HYPERBOLIC = "scaled-hyperbolic"
SPHERE = "sphere"
FORMS = (CONSTANT, HYPERBOLIC_DISK, SCALED_HYPERBOLIC, SPHERE)
BUMP = "gaussian-bump"


class InitialData(object):
    """
    Named initial conformal factor u0 (the metric is e^{2 u0} times the
    Euclidean one).

    Forms:
        constant c:          u0 = c
        hyperbolic-disk:     u0 = log(2 / (1 - |x|^2))
        scaled-hyperbolic a: u0 = log(2a / (a^2 - |x|^2)), a > 1
        sphere:              v0 = 4 / (1 + |x|^2)^2, u0 = log(v0) / 2

    A gaussian bump amplitude * exp(-|x - centre|^2 / width^2) can be added
    to u0 of any form, and ``scale`` multiplies v0 (u0 += log(scale) / 2).
    """

    def __init__(self, form, c=0.0, a=None, bump_amplitude=0.0,
                 bump_width=None, bump_centre=None, scale=1.0):
        self._log = logging.getLogger(__name__)
        if form not in FORMS:
            raise ConfigurationError("unknown initial data form {}".format(form))
        if form == SCALED_HYPERBOLIC and (a is None or not a > 1.0):
            raise ConfigurationError("scaled-hyperbolic needs a > 1, got {}".format(a))
        if bump_amplitude and not (bump_width and bump_width > 0.0):
            raise ConfigurationError("gaussian bump needs a positive width")
        if not scale > 0.0:
            raise ConfigurationError("scale must be positive, got {}".format(scale))
        self.form = form
        self.c = float(c)
        self.a = None if a is None else float(a)
        self.bump_amplitude = float(bump_amplitude)
        self.bump_width = None if bump_width is None else float(bump_width)
        self.bump_centre = None if bump_centre is None else tuple(float(x) for x in bump_centre)
        self.scale = float(scale)

    @classmethod
    def from_string(cls, text):
        """
        Parse "constant 0", "hyperbolic-disk", "scaled-hyperbolic 1.2",
        "sphere", optionally followed by "+ gaussian-bump amplitude width"
        and/or "* scale".
        """
        scale = 1.0
        if "*" in text:
            text, factor = text.split("*", 1)
            scale = float(factor)
        parts = [p.strip() for p in text.split("+")]
        head = parts[0].split()
        if not head:
            raise ConfigurationError("empty initial data expression")
        kwargs = {"scale": scale}
        form = head[0]
        if form == CONSTANT:
            kwargs["c"] = float(head[1]) if len(head) > 1 else 0.0
        elif form == SCALED_HYPERBOLIC:
            if len(head) < 2:
                raise ConfigurationError("scaled-hyperbolic needs a parameter a")
            kwargs["a"] = float(head[1])
        for extra in parts[1:]:
            tokens = extra.split()
            if not tokens or tokens[0] != BUMP or len(tokens) < 3:
                raise ConfigurationError("cannot parse '{}'".format(extra))
            kwargs["bump_amplitude"] = float(tokens[1])
            kwargs["bump_width"] = float(tokens[2])
            if len(tokens) >= 5:
                kwargs["bump_centre"] = (float(tokens[3]), float(tokens[4]))
        return cls(form, **kwargs)

    @classmethod
    def from_dict(cls, table):
        table = dict(table)
        form = table.pop("form", None)
        bump = table.pop("bump", None) or {}
        kwargs = {
            "c": table.pop("c", 0.0),
            "a": table.pop("a", None),
            "scale": table.pop("scale", 1.0),
        }
        if bump:
            kwargs["bump_amplitude"] = bump.get("amplitude", 0.0)
            kwargs["bump_width"] = bump.get("width")
            kwargs["bump_centre"] = bump.get("centre")
        if table:
            raise ConfigurationError("unknown initial data keys {}".format(sorted(table)))
        return cls(form, **kwargs)

    def to_dict(self):
        out = {"form": self.form, "c": self.c, "scale": self.scale}
        if self.a is not None:
            out["a"] = self.a
        if self.bump_amplitude:
            bump = {"amplitude": self.bump_amplitude, "width": self.bump_width}
            if self.bump_centre is not None:
                bump["centre"] = list(self.bump_centre)
            out["bump"] = bump
        return out

    @property
    def has_bump(self):
        return self.bump_amplitude != 0.0

    @property
    def defined_on_plane(self):
        return self.form in (CONSTANT, SPHERE)

    @property
    def finite_plane_area(self):
        # Area of e^{2 u0} over the whole plane; bumps have compact effect
        return self.form == SPHERE

    @property
    def constant_curvature(self):
        # Gauss curvature of the base form, None when not constant
        if self.has_bump:
            return None
        if self.form == CONSTANT:
            return 0.0
        if self.form in (HYPERBOLIC_DISK, SCALED_HYPERBOLIC):
            return -1.0 / self.scale
        return 1.0 / self.scale

    def singular_radius(self):
        if self.form == HYPERBOLIC_DISK:
            return 1.0
        if self.form == SCALED_HYPERBOLIC:
            return self.a
        return math.inf

    def base_u(self, rho):
        rho = np.asarray(rho, dtype=float)
        if self.form == CONSTANT:
            u = np.full(rho.shape, self.c)
        elif self.form == SPHERE:
            u = 0.5 * np.log(4.0) - np.log1p(rho * rho)
        else:
            a = 1.0 if self.form == HYPERBOLIC_DISK else self.a
            gap = a * a - rho * rho
            if np.any(gap <= 0.0):
                raise SingularEvaluationError(
                    "{} initial data is singular at |x| >= {}".format(self.form, a))
            u = np.log(2.0 * a / gap)
        return u + 0.5 * math.log(self.scale)

    def centre_for(self, grid, seed=None, dilation=1.0):
        if not self.has_bump:
            return (0.0, 0.0)
        if grid.is_radial:
            if self.bump_centre is not None and any(self.bump_centre):
                raise ConfigurationError("radial grids only carry bumps centred at 0")
            return (0.0, 0.0)
        if self.bump_centre is not None:
            return self.bump_centre
        # Bump placement is the only random choice in a scenario
        rng = np.random.default_rng(seed)
        radius = 0.3 * grid.r * dilation * math.sqrt(rng.uniform())
        angle = rng.uniform(0.0, 2.0 * math.pi)
        return (radius * math.cos(angle), radius * math.sin(angle))

    def u_at(self, points, centre=(0.0, 0.0)):
        points = np.atleast_2d(np.asarray(points, dtype=float))
        rho = np.hypot(points[:, 0], points[:, 1])
        u = self.base_u(rho)
        if self.has_bump:
            d2 = (points[:, 0] - centre[0]) ** 2 + (points[:, 1] - centre[1]) ** 2
            u = u + self.bump_amplitude * np.exp(-d2 / self.bump_width ** 2)
        return u

    def v_at(self, points, centre=(0.0, 0.0)):
        return np.exp(2.0 * self.u_at(points, centre))

    def evaluate(self, grid, seed=None, dilation=1.0):
        # dilation a evaluates u0(a x), the data of the rescaled flow
        centre = self.centre_for(grid, seed, dilation)
        self._log.debug("evaluating {} on {}".format(self.form, grid))
        return ScalarField(grid, self.u_at(dilation * grid.points, centre))

    def __repr__(self):
        return "InitialData({})".format(self.to_dict())


def evaluate(expr, grid, seed=None):
    """
    Evaluate a named initial-data expression on the active nodes of a grid.

    Args:
        expr: InitialData, a mapping accepted by InitialData.from_dict or an
            expression string accepted by InitialData.from_string
        grid: Grid
        seed: random seed used only to place an unspecified bump centre

    Returns:
        ScalarField of u0 values
    """
    if isinstance(expr, str):
        expr = InitialData.from_string(expr)
    elif isinstance(expr, dict):
        expr = InitialData.from_dict(expr)
    return expr.evaluate(grid, seed)
