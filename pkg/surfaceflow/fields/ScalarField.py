# -*- coding: utf-8 -*-
# Generic/Built-in
import numpy as np

from ..lib.FlowExceptions import GridMismatchError, SingularEvaluationError

ACTIVE = "active"
INTERIOR_ONLY = "interior"


class ScalarField(object):
    """
    Real values on the nodes of a grid.

    Parameters:
        grid (Grid): the carrier grid
        values (array-like): one finite value per active node (support
            ACTIVE) or per interior node (support INTERIOR_ONLY)
        support (str): ACTIVE or INTERIOR_ONLY
    """

    def __init__(self, grid, values, support=ACTIVE):
        values = np.array(values, dtype=float)
        expected = grid.n_active if support == ACTIVE else grid.n_interior
        if values.shape != (expected,):
            raise GridMismatchError(
                "expected {} {} values on {}, got shape {}".format(
                    expected, support, grid, values.shape))
        if not np.all(np.isfinite(values)):
            raise SingularEvaluationError(
                "non-finite values in field on {}".format(grid))
        values.setflags(write=False)
        self.grid = grid
        self.values = values
        self.support = support

    @property
    def interior(self):
        return self.values[:self.grid.n_interior]

    @property
    def boundary(self):
        if self.support != ACTIVE:
            raise GridMismatchError("interior-only field has no boundary values")
        return self.values[self.grid.n_interior:]

    def with_values(self, values):
        return ScalarField(self.grid, values, self.support)

    def __add__(self, other):
        if isinstance(other, ScalarField):
            self._require_compatible(other)
            return self.with_values(self.values + other.values)
        return self.with_values(self.values + other)

    def __mul__(self, scale):
        return self.with_values(self.values * scale)

    __rmul__ = __mul__

    def _require_compatible(self, other):
        self.grid.require_same(other.grid)
        if self.support != other.support:
            raise GridMismatchError("cannot combine {} and {} fields".format(
                self.support, other.support))

    def max_norm(self):
        return float(np.max(np.abs(self.values))) if self.values.size else 0.0

    def __repr__(self):
        return "ScalarField({}, {} values)".format(self.support, self.values.size)
