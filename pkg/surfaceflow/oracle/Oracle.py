# -*- coding: utf-8 -*-
# Generic/Built-in
from concurrent.futures import ThreadPoolExecutor

import math

import numpy as np

from ..lib.FlowComponent import FlowComponent
from ..lib.FlowExceptions import GridMismatchError
from ..metrics.Conformal import scaled_laplacian, CUSP_C
from ..metrics.Barriers import (
    barrier_hyperbolic,
    barrier_upper,
    barrier_curvature_growth
)
from ..operators.Eigen import first_eigenpair
from ..ladder.Ladder import PLANE_EXHAUST, volume_law_fit
from .Reports import BoundReport, resolve_checks, FAIL

# Curvature checks skip nodes this many cells from the boundary
BOUNDARY_LAYER_CELLS = 2

# Exact factor between the Aronson-Benilan and K_lower slacks
COUPLING_TOL = 1e-12

# Relative slope errors below this are not resolved by the area fit
SLOPE_NOISE = 0.005


class _Worst(object):
    # Running minimum of a slack array with its location; first hit wins

    def __init__(self):
        self.slack = math.inf
        self.node = None
        self.radius = None
        self.time = None

    def update(self, slack, nodes, radii, t):
        if slack.size == 0:
            return
        i = int(np.argmin(slack))
        if slack[i] < self.slack:
            self.slack = float(slack[i])
            self.node = int(nodes[i])
            self.radius = float(radii[i])
            self.time = float(t)

    @property
    def found(self):
        return self.node is not None

    def report(self, bound_id, tolerance, excluded=0, note="", details=None):
        if not self.found:
            return BoundReport.skipped(bound_id, note or "no checked nodes or times",
                                       tolerance, details)
        return BoundReport.measured(bound_id, self.slack, tolerance, self.node, self.radius,
                                    self.time, excluded, note, details)


def _positive_constant(bound_id, worst, details, note=""):
    # Largest valid barrier constant; pass iff it is positive
    if not worst.found:
        return BoundReport.skipped(bound_id, note or "no snapshots with t > 0", 0.0, details)
    report = worst.report(bound_id, 0.0, note=note, details=details)
    if not worst.slack > 0.0:
        report.verdict = FAIL
    return report


class BoundOracle(FlowComponent):
    """
    Checks the curvature, conformal-factor, area and comparison bounds on
    computed trajectories.

    Parameters:
        tolerance (float): discretisation tolerance eps_disc
        boundary_layer_cells (float): curvature checks skip interior nodes
            within this many cells of the boundary
        t_min (float): only snapshots with physical time >= t_min are checked
        newton_tol (float): solver tolerance; comparisons allow 10x this
        cusp_C (float): constant of the cusp tail in plane areas
        cusp_r0 (float): cusp lower bound is checked on |x| >= cusp_r0 > 1
        slope_tol, extinction_tol (float): relative tolerances of the area law
        scaling_factor (float): rescaled flows may differ by this many eps_disc
    """

    def __init__(self, tolerance=0.0, boundary_layer_cells=BOUNDARY_LAYER_CELLS, t_min=0.0,
                 newton_tol=1e-10, cusp_C=CUSP_C, cusp_r0=2.0, slope_tol=0.03,
                 extinction_tol=0.02, scaling_factor=4.0):
        super().__init__()
        self.tolerance = float(tolerance)
        self.boundary_layer_cells = float(boundary_layer_cells)
        self.t_min = float(t_min)
        self.newton_tol = float(newton_tol)
        self.cusp_C = float(cusp_C)
        self.cusp_r0 = float(cusp_r0)
        self.slope_tol = float(slope_tol)
        self.extinction_tol = float(extinction_tol)
        self.scaling_factor = float(scaling_factor)

    # Helpers
    def checked_interior(self, grid):
        """Interior node indices outside the boundary layer, and the excluded count."""
        distance = grid.distance_to_boundary()[:grid.n_interior]
        keep = distance > self.boundary_layer_cells * grid.h * (1.0 + 1e-9)
        nodes = np.flatnonzero(keep)
        return nodes, grid.n_interior - nodes.size

    def _frames(self, traj, positive=True):
        # Snapshots inside the checked time window, with physical times
        for snapshot in traj.snapshots:
            t = snapshot.physical_time
            if t < self.t_min or (positive and not t > 0.0):
                continue
            yield snapshot, t

    def initial_curvature_range(self, traj):
        nodes, _ = self.checked_interior(traj.grid)
        if nodes.size == 0:
            return math.nan, math.nan
        K = -scaled_laplacian(traj.initial)[nodes]
        return float(np.min(K)), float(np.max(K))

    def measured_K0(self, traj):
        return self.initial_curvature_range(traj)[1]

    # Curvature bounds
    def _lower_curvature(self, traj):
        nodes, excluded = self.checked_interior(traj.grid)
        radii = traj.grid.radii[nodes]
        k_worst = _Worst()
        ab_worst = _Worst()
        for snapshot, t in self._frames(traj):
            s = scaled_laplacian(snapshot)[nodes]
            inv_t = 1.0 / t
            # K + 1/(2t) with K = -s, and 1/t - p with p = 2s: exactly twice the first
            k_worst.update(0.5 * inv_t - s, nodes, radii, t)
            ab_worst.update(inv_t - 2.0 * s, nodes, radii, t)
        return k_worst, ab_worst, excluded

    def check_K_lower(self, traj):
        """K >= -1/(2t) at every checked node and time t > 0."""
        worst, _, excluded = self._lower_curvature(traj)
        return worst.report("K_lower", self.tolerance, excluded)

    def check_aronson_benilan(self, traj):
        """
        v_t <= v / t with v_t / v read off the spatial side as the pressure
        p = Δ_h log v / v; its slack is exactly twice the K_lower slack.
        """
        k_worst, worst, excluded = self._lower_curvature(traj)
        details = {}
        note = ""
        coupled = True
        if worst.found:
            defect = abs(worst.slack - 2.0 * k_worst.slack)
            details = {"K_lower_slack": k_worst.slack, "coupling_defect": defect}
            coupled = defect <= COUPLING_TOL * max(1.0, abs(worst.slack))
            if not coupled:
                note = "pressure and curvature disagree: p != -2K"
        report = worst.report("AB_estimate", 2.0 * self.tolerance, excluded, note, details)
        if not coupled:
            report.verdict = FAIL
        return report

    def check_K_upper_neg(self, traj):
        """K <= -1/(2t + 1) for data with K[u0] <= -1."""
        nodes, excluded = self.checked_interior(traj.grid)
        _, k0_max = self.initial_curvature_range(traj)
        if not k0_max <= -1.0 + self.tolerance:
            return BoundReport.skipped(
                "K_upper_neg", "initial curvature reaches {!r} > -1".format(k0_max),
                self.tolerance, {"K0_max": _finite(k0_max)})
        radii = traj.grid.radii[nodes]
        worst = _Worst()
        for snapshot, t in self._frames(traj, positive=False):
            K = -scaled_laplacian(snapshot)[nodes]
            worst.update(-1.0 / (2.0 * t + 1.0) - K, nodes, radii, t)
        return worst.report("K_upper_neg", self.tolerance, excluded,
                            details={"K0_max": k0_max})

    def check_K_upper_pos(self, traj, K0):
        """
        K <= 1 / (1/K0 - 2t) for t < 1/(2 K0) when K[u0] <= K0 with K0 > 0;
        for K0 <= 0 this is the K <= 0 bound reported as K_upper_zero.
        """
        bound_id = "K_upper_pos" if K0 > 0.0 else "K_upper_zero"
        K0 = max(float(K0), 0.0)
        nodes, excluded = self.checked_interior(traj.grid)
        _, k0_max = self.initial_curvature_range(traj)
        if not k0_max <= K0 + self.tolerance:
            return BoundReport.skipped(
                bound_id, "initial curvature reaches {!r} > K0={!r}".format(k0_max, K0),
                self.tolerance, {"K0": K0, "K0_max": _finite(k0_max)})
        radii = traj.grid.radii[nodes]
        worst = _Worst()
        for snapshot, t in self._frames(traj, positive=False):
            if K0 > 0.0 and not t < 0.5 / K0:
                continue
            bound = 1.0 / (1.0 / K0 - 2.0 * t) if K0 > 0.0 else 0.0
            K = -scaled_laplacian(snapshot)[nodes]
            worst.update(bound - K, nodes, radii, t)
        details = {"K0": K0}
        if K0 > 0.0:
            details["t_window"] = 0.5 / K0
        return worst.report(bound_id, self.tolerance, excluded, details=details)

    # Conformal factor bounds
    def check_conformal_bounds(self, traj, variant, K0=None):
        """
        Compare u with a barrier at every active node.

        Variants:
            u_lower_hyp:  u >= log(2/(1-|x|^2)) + log(2t)/2 (flows in the unit disk)
            u_upper_hyp:  u <= log(2r/(r^2-|x|^2)) + log(2t+1)/2 on a disk of radius
                          r <= 1 (K[u0] <= -1)
            u_vs_u0_neg:  u >= u0 + log(2t+1)/2 (K[u0] <= -1)
            u_vs_u0_pos:  u >= u0 + log(1-2 K0 t)/2 for t < 1/(2 K0) (K0 > 0)
            u_vs_u0_zero: u >= u0 (K[u0] <= 0)
            u_lower_cusp: largest C with v >= C t / (|x|^2 log^2|x|), |x| >= cusp_r0
        """
        if variant == "u_lower_cusp":
            return self._cusp_constant(traj)
        grid = traj.grid
        radii = grid.radii
        nodes = np.arange(grid.n_active)
        excluded = 0
        _, k0_max = self.initial_curvature_range(traj)
        u0 = traj.initial.u.values
        if variant in ("u_lower_hyp", "u_upper_hyp"):
            if grid.r > 1.0:
                return BoundReport.skipped(variant, "flow does not live in the unit disk",
                                           self.tolerance)
            inside = radii < grid.r * (1.0 - 1e-12)
            excluded = int(np.count_nonzero(~inside))
            nodes = nodes[inside]
        if variant in ("u_upper_hyp", "u_vs_u0_neg") and not k0_max <= -1.0 + self.tolerance:
            return BoundReport.skipped(
                variant, "initial curvature reaches {!r} > -1".format(k0_max),
                self.tolerance, {"K0_max": _finite(k0_max)})
        if variant == "u_vs_u0_zero" and not k0_max <= self.tolerance:
            return BoundReport.skipped(
                variant, "initial curvature reaches {!r} > 0".format(k0_max),
                self.tolerance, {"K0_max": _finite(k0_max)})
        if variant == "u_vs_u0_pos":
            K0 = k0_max if K0 is None else float(K0)
            if not K0 > 0.0:
                return BoundReport.skipped(variant, "initial curvature bound K0 is not positive",
                                           self.tolerance, {"K0": _finite(K0)})

        r = radii[nodes]
        worst = _Worst()
        positive = variant == "u_lower_hyp"
        disk_shift = 0.0
        if variant == "u_upper_hyp":
            # Flows on B_r stay below the hyperbolic flow of B_r itself
            disk_shift = np.log(grid.r * (1.0 - r * r) / (grid.r * grid.r - r * r))
        for snapshot, t in self._frames(traj, positive=positive):
            u = snapshot.u.values[nodes]
            if variant == "u_lower_hyp":
                slack = u - barrier_hyperbolic(r, t, 0.0)
            elif variant == "u_upper_hyp":
                slack = barrier_upper(r, t) + disk_shift - u
            elif variant == "u_vs_u0_neg":
                slack = u - (u0[nodes] + 0.5 * math.log(2.0 * t + 1.0))
            elif variant == "u_vs_u0_pos":
                if not t < 0.5 / K0:
                    continue
                slack = u - (u0[nodes] + barrier_curvature_growth(t, K0))
            elif variant == "u_vs_u0_zero":
                slack = u - u0[nodes]
            else:
                raise GridMismatchError("unknown conformal bound {}".format(variant))
            worst.update(slack, nodes, r, t)
        details = {} if K0 is None else {"K0": K0}
        return worst.report(variant, self.tolerance, excluded, details=details)

    def _cusp_constant(self, traj):
        grid = traj.grid
        radii = grid.radii
        nodes = np.flatnonzero(radii >= self.cusp_r0)
        if nodes.size == 0 or not self.cusp_r0 > 1.0:
            return BoundReport.skipped("u_lower_cusp",
                                       "no nodes with |x| >= {}".format(self.cusp_r0))
        r = radii[nodes]
        profile = r * r * np.log(r) ** 2
        worst = _Worst()
        for snapshot, t in self._frames(traj):
            worst.update(snapshot.v[nodes] * profile / t, nodes, r, t)
        details = {"C_star": _finite(worst.slack), "r0": self.cusp_r0}
        return _positive_constant("u_lower_cusp", worst, details)

    # Area law
    def check_volume_law(self, plane_run):
        """
        Area of plane flows decays like 4 pi (T - t) with T = Vol0 / (4 pi):
        slack is the smaller of the two margins
        slope_tol - |slope + 4 pi| / 4 pi and
        extinction_tol - |T_fit - T| / T, for the widest truncation. The
        verdict also fails when the slope error grows with R by more than
        SLOPE_NOISE.
        """
        if plane_run is None or plane_run.axis != PLANE_EXHAUST:
            return BoundReport.skipped("vol_law", "needs a plane-exhaust ladder")
        if not plane_run.details.get("finite_area", False):
            return BoundReport.skipped("vol_law", "initial data have infinite area")
        fit = volume_law_fit(plane_run, self.cusp_C)
        slope = fit["slopes"][-1]
        if slope is None:
            return BoundReport.skipped(
                "vol_law", "no far-field flows or too few snapshots in the fit window",
                details=_clean(fit))
        four_pi = 4.0 * math.pi
        expected_T = fit["expected_T"]
        slope_dev = [None if s is None else abs(s + four_pi) / four_pi for s in fit["slopes"]]
        extinction = fit["extinction"][-1]
        t_dev = abs(extinction - expected_T) / expected_T
        slack = min(self.slope_tol - slope_dev[-1], self.extinction_tol - t_dev)
        improving = _improving([d for d in slope_dev if d is not None])
        details = _clean(fit)
        details.update({"slope_deviation": slope_dev, "extinction_deviation": t_dev,
                        "improving": improving})
        report = BoundReport.measured("vol_law", slack, 0.0, time=None, details=details,
                                      radius=plane_run.parameters[-1])
        if not improving:
            report.verdict = FAIL
            report.note = "slope error grows as the truncation widens"
        return report

    # Barrier constants and comparisons
    def check_eigen_barrier(self, traj, pair=None, C=None):
        """
        Largest C* with v >= C* t / phi on interior nodes for t > 0. Pass iff
        C* > 0, or C* >= C when a constant is given.
        """
        if pair is None:
            pair = first_eigenpair(traj.grid)
        traj.grid.require_same(pair.phi.grid, "eigenfunction")
        nodes = np.arange(traj.grid.n_interior)
        phi = pair.phi.values
        radii = traj.grid.radii[nodes]
        worst = _Worst()
        for snapshot, t in self._frames(traj):
            v = snapshot.v[nodes]
            worst.update(v * phi / t, nodes, radii, t)
        details = {"C_star": _finite(worst.slack), "lambda1": pair.lambda1}
        if C is None:
            return _positive_constant("eigen_barrier", worst, details)
        details["C"] = C
        if not worst.found:
            return BoundReport.skipped("eigen_barrier", "no snapshots with t > 0", 0.0, details)
        return BoundReport.measured("eigen_barrier", worst.slack - C, 0.0, worst.node,
                                    worst.radius, worst.time, details=details)

    def check_comparison(self, traj_a, traj_b):
        """
        traj_a >= traj_b pointwise, as relative slack (v_a - v_b) / v_b over
        shared times; traj_b carries the smaller boundary data.
        """
        traj_a.grid.require_same(traj_b.grid, "compared trajectory")
        radii = traj_a.grid.radii
        nodes = np.arange(traj_a.grid.n_active)
        worst = _Worst()
        for i, j in traj_a.shared_times(traj_b):
            a = traj_a.snapshots[i]
            b = traj_b.snapshots[j]
            if a.physical_time < self.t_min:
                continue
            slack = np.expm1(2.0 * (a.u.values - b.u.values))
            worst.update(slack, nodes, radii, a.physical_time)
        return worst.report("comparison", 10.0 * self.newton_tol,
                            details={"upper": traj_a.name, "lower": traj_b.name})

    def check_scaling_symmetry(self, reference, scaled, alpha):
        """
        The flow of u0(alpha x) on the disk of radius r / alpha is the
        reference flow read at (alpha x, alpha^2 t). The rescaled run has its
        own spacing and time steps, so u is compared on the reference nodes
        whose images x / alpha are rescaled grid nodes.
        """
        ref_nodes, scaled_nodes = mapped_nodes(reference.grid, scaled.grid, alpha)
        radii = reference.grid.radii[ref_nodes]
        worst = _Worst()
        pairs = scaled.shared_times(reference, scale=alpha * alpha)
        for i, j in pairs:
            ref = reference.snapshots[j]
            if ref.physical_time < self.t_min:
                continue
            gap = np.abs(scaled.snapshots[i].u.values[scaled_nodes] - ref.u.values[ref_nodes])
            worst.update(-gap, ref_nodes, radii, ref.physical_time)
        return worst.report("scaling_symmetry", self.scaling_factor * self.tolerance,
                            details={"alpha": alpha, "matched_snapshots": len(pairs),
                                     "matched_nodes": int(ref_nodes.size)})

    # Aggregation
    def assess(self, run, checks="all", executor=None, threads=1):
        """
        Run the requested checks on a LadderRun and return the reports in
        registry order. Checks whose inputs the run does not carry are
        skipped with a note.
        """
        ids = resolve_checks(checks)
        primary = run.primary
        K0 = self.measured_K0(primary)

        def one(bound_id):
            if bound_id == "K_lower":
                return self.check_K_lower(primary)
            if bound_id == "AB_estimate":
                return self.check_aronson_benilan(primary)
            if bound_id == "K_upper_neg":
                return self.check_K_upper_neg(primary)
            if bound_id == "K_upper_pos":
                if not K0 > 0.0:
                    return BoundReport.skipped(
                        bound_id, "measured initial curvature {!r} is not positive".format(K0),
                        self.tolerance, {"K0": _finite(K0)})
                return self.check_K_upper_pos(primary, K0)
            if bound_id == "K_upper_zero":
                return self.check_K_upper_pos(primary, 0.0)
            if bound_id == "vol_law":
                return self.check_volume_law(run)
            if bound_id == "eigen_barrier":
                return self.check_eigen_barrier(primary)
            if bound_id == "comparison":
                if run.companion is None:
                    return BoundReport.skipped(bound_id, "no companion trajectory",
                                               10.0 * self.newton_tol)
                return self.check_comparison(primary, run.companion)
            if bound_id == "scaling_symmetry":
                if run.scaled is None:
                    return BoundReport.skipped(bound_id, "no rescaled trajectory",
                                               self.scaling_factor * self.tolerance)
                return self.check_scaling_symmetry(primary, run.scaled,
                                                   run.details.get("alpha", 0.5))
            return self.check_conformal_bounds(primary, bound_id)

        if executor is not None:
            reports = list(executor.map(one, ids))
        else:
            with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
                reports = list(pool.map(one, ids))
        for report in reports:
            if report.failed:
                self._log.error("{} failed: slack {!r} below -{!r}".format(
                    report.bound_id, report.worst_slack, report.tolerance))
            elif report.verdict == "skipped":
                self._log.warning("{} skipped: {}".format(report.bound_id, report.note))
            else:
                self._log.info("{} passed with slack {!r}".format(
                    report.bound_id, report.worst_slack))
        return reports


def mapped_nodes(reference_grid, scaled_grid, alpha):
    """
    Index pairs (reference, rescaled) of active nodes with
    x_rescaled = x_reference / alpha.

    Raises:
        GridMismatchError when the rescaled grid does not cover the disk of
        radius r / alpha or no node maps onto a node
    """
    if reference_grid.kind != scaled_grid.kind or \
            abs(alpha * scaled_grid.r - reference_grid.r) > 1e-9 * reference_grid.r:
        raise GridMismatchError("rescaled grid {} is not the reference disk scaled by 1/{}".format(
            scaled_grid.describe(), alpha))
    h = scaled_grid.h
    lattice = {}
    for index, (x, y) in enumerate(scaled_grid.points / h):
        key = (int(round(x)), int(round(y)))
        if abs(x - key[0]) < 1e-6 and abs(y - key[1]) < 1e-6:
            lattice[key] = index
    ref_nodes = []
    scaled_nodes = []
    for index, (x, y) in enumerate(reference_grid.points / (alpha * h)):
        key = (int(round(x)), int(round(y)))
        if abs(x - key[0]) < 1e-6 and abs(y - key[1]) < 1e-6 and key in lattice:
            ref_nodes.append(index)
            scaled_nodes.append(lattice[key])
    if not ref_nodes:
        raise GridMismatchError("no reference node maps onto the rescaled grid")
    return np.array(ref_nodes, dtype=int), np.array(scaled_nodes, dtype=int)


def _improving(deviations):
    # Each wider truncation may not be worse than the last beyond the noise floor
    return all(b <= max(a, SLOPE_NOISE) for a, b in zip(deviations, deviations[1:]))


def _finite(value):
    # JSON artifacts carry no inf/nan
    if value is None:
        return None
    value = float(value)
    return value if math.isfinite(value) else None


def _clean(table):
    out = {}
    for key, value in table.items():
        if isinstance(value, list):
            out[key] = [_finite(v) if isinstance(v, float) else v for v in value]
        elif isinstance(value, float):
            out[key] = _finite(value)
        else:
            out[key] = value
    return out


DEFAULT_ORACLE = BoundOracle()


def check_K_lower(traj, oracle=DEFAULT_ORACLE):
    return oracle.check_K_lower(traj)


def check_aronson_benilan(traj, oracle=DEFAULT_ORACLE):
    return oracle.check_aronson_benilan(traj)


def check_K_upper_neg(traj, oracle=DEFAULT_ORACLE):
    return oracle.check_K_upper_neg(traj)


def check_K_upper_pos(traj, K0, oracle=DEFAULT_ORACLE):
    return oracle.check_K_upper_pos(traj, K0)


def check_conformal_bounds(traj, variant, K0=None, oracle=DEFAULT_ORACLE):
    return oracle.check_conformal_bounds(traj, variant, K0)


def check_volume_law(plane_run, oracle=DEFAULT_ORACLE):
    return oracle.check_volume_law(plane_run)


def check_eigen_barrier(traj, pair=None, C=None, oracle=DEFAULT_ORACLE):
    return oracle.check_eigen_barrier(traj, pair, C)


def check_comparison(traj_a, traj_b, oracle=DEFAULT_ORACLE):
    return oracle.check_comparison(traj_a, traj_b)


def check_scaling_symmetry(reference, scaled, alpha, oracle=DEFAULT_ORACLE):
    return oracle.check_scaling_symmetry(reference, scaled, alpha)
