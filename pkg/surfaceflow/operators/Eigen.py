# -*- coding: utf-8 -*-
# Generic/Built-in
from dataclasses import dataclass

import numpy as np
from scipy.sparse.linalg import splu

from ..lib.FlowComponent import FlowComponent
from ..lib.FlowExceptions import EigenNonConvergenceError
from ..fields.ScalarField import ScalarField, INTERIOR_ONLY
from .Laplacian import laplacian_operator

EIGEN_TOL = 1e-10
EIGEN_MAX_ITER = 500


@dataclass(frozen=True)
class EigenPair:
    """First Dirichlet eigenpair of -Δ_h: phi > 0, weighted L2 norm 1."""
    lambda1: float
    phi: ScalarField
    iterations: int
    residual: float


class EigenSolver(FlowComponent):

    def first_eigenpair(self, grid, tol=EIGEN_TOL, max_iter=EIGEN_MAX_ITER):
        key = (grid.kind, grid.r, grid.h, grid.n_active, tol, max_iter)
        return self.cached(key, lambda: self._inverse_power(grid, tol, max_iter))

    def _inverse_power(self, grid, tol, max_iter):
        operator = laplacian_operator(grid)
        minus_a = (-operator.A).tocsc()
        lu = splu(minus_a)
        weights = grid.quadrature_weights()[:grid.n_interior]

        def normalise(x):
            return x / np.sqrt(np.dot(weights, x * x))

        x = normalise(np.ones(grid.n_interior))
        residual = np.inf
        lam = 0.0
        for iteration in range(1, max_iter + 1):
            x = normalise(lu.solve(x))
            applied = minus_a @ x
            lam = np.dot(weights, x * applied) / np.dot(weights, x * x)
            residual = np.max(np.abs(applied - lam * x)) / (abs(lam) * np.max(np.abs(x)))
            if residual <= tol:
                break
        else:
            raise EigenNonConvergenceError(
                "inverse power iteration on {} stalled at residual {:.3e} after {} "
                "iterations".format(grid, residual, max_iter))

        if np.sum(x) < 0.0:
            x = -x
        if np.min(x) <= 0.0:
            raise EigenNonConvergenceError(
                "first eigenfunction on {} is not positive".format(grid))
        self._log.info("lambda1 = {:.10f} on {} after {} iterations".format(
            lam, grid, iteration))
        return EigenPair(float(lam), ScalarField(grid, x, INTERIOR_ONLY),
                         iteration, float(residual))


EIGEN = EigenSolver()


def first_eigenpair(grid, tol=EIGEN_TOL, max_iter=EIGEN_MAX_ITER):
    """
    First Dirichlet eigenpair of -Δ_h on a disk grid by inverse power
    iteration with a sparse LU factorization.

    Raises:
        EigenNonConvergenceError when the relative residual
        |(-Δ_h) phi - lambda phi|_inf / (lambda |phi|_inf) stays above tol
    """
    return EIGEN.first_eigenpair(grid, tol, max_iter)
