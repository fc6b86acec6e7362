# -*- coding: utf-8 -*-
# Generic/Built-in
from concurrent.futures import ThreadPoolExecutor

import logging
import os

import pandas as pd

from ..lib.FlowExceptions import FingerprintMismatchError
from ..metrics.Conformal import curvature, pressure, volume, plane_volume, far_field_volume
from ..ladder.Ladder import LadderRun, PLANE_EXHAUST, run_ladder
from ..oracle.Calibration import Tolerance, calibrate
from ..oracle.Oracle import BoundOracle
from ..oracle.Reports import FAIL, resolve_checks
from .Scenario import scenario_from_record
from .Storage import (RunStore, trajectory_frame, SCENARIO_FILE, CALIBRATION_FILE,
                      LADDER_FILE, REPORT_DIR, PLOT_DIR)

_log = logging.getLogger(__name__)

# Rescaled flows may differ from the reference by this many eps_disc
SCALING_FACTOR = 4.0


def oracle_for(scenario, tolerance):
    """The bound oracle of a scenario, with eps_disc at the checked spacing."""
    epsilon = tolerance.epsilon(scenario.spacing, scenario.policy.dt_max)
    return BoundOracle(tolerance=epsilon,
                       boundary_layer_cells=scenario.boundary_layer_cells,
                       t_min=scenario.t_min,
                       newton_tol=scenario.policy.newton_tol,
                       cusp_C=scenario.cusp_C,
                       cusp_r0=scenario.cusp_r0,
                       slope_tol=scenario.slope_tol,
                       extinction_tol=scenario.extinction_tol,
                       scaling_factor=SCALING_FACTOR)


def run(scenario):
    """
    Execute a scenario end to end: calibrate eps_disc, run the ladder, store
    every trajectory, then verify the stored artifacts exactly as the
    ``verify`` command would.

    Returns:
        list of BoundReport
    """
    store = RunStore(scenario.output_dir)
    store.write_json(SCENARIO_FILE, {"fingerprint": scenario.fingerprint,
                                     "scenario": scenario.to_dict()})
    _log.info("running {} into {}".format(scenario.name, store.root))
    with ThreadPoolExecutor(max_workers=scenario.threads) as pool:
        tolerance = calibrate(scenario.calibration, scenario.policy, pool)
        store.write_json(CALIBRATION_FILE, {
            "fingerprint": scenario.fingerprint,
            "tolerance": tolerance.to_dict(),
            "h": scenario.spacing,
            "dt_max": scenario.policy.dt_max,
            "epsilon": tolerance.epsilon(scenario.spacing, scenario.policy.dt_max),
        })
        ladder = run_ladder(scenario, pool)
    for trajectory in ladder.all_trajectories():
        store.save_trajectory(trajectory)
    store.write_json(LADDER_FILE, ladder.to_dict())
    return verify(store.root)


def load_run(directory):
    """
    Load the scenario, tolerance and ladder stored in a run directory.

    Raises:
        FingerprintMismatchError when any artifact belongs to another
        scenario or was altered after it was written
    """
    store = RunStore(directory)
    record = store.read_json(SCENARIO_FILE)
    scenario = scenario_from_record(record).with_output(directory)
    if scenario.fingerprint != record.get("fingerprint"):
        raise FingerprintMismatchError(
            "scenario.json content does not hash to its recorded fingerprint")
    calibration = store.read_json(CALIBRATION_FILE)
    ladder = store.read_json(LADDER_FILE)
    for what, table in (("calibration", calibration), ("ladder", ladder)):
        if table.get("fingerprint") != scenario.fingerprint:
            raise FingerprintMismatchError("{} record belongs to another scenario".format(what))
    names = list(ladder["trajectories"])
    names += list(ladder.get("far_field", []))
    names += [n for n in (ladder.get("companion"), ladder.get("scaled")) if n is not None]
    trajectories = {name: store.load_trajectory(name, scenario.fingerprint) for name in names}
    tolerance = Tolerance.from_dict(calibration["tolerance"])
    return store, scenario, tolerance, LadderRun.from_dict(ladder, trajectories)


def verify(directory, checks=None, threads=None):
    """
    Re-run the bound checks on stored artifacts and write one report per
    bound to reports/<bound_id>.json.

    Returns:
        list of BoundReport in registry order
    """
    store, scenario, tolerance, ladder = load_run(directory)
    ids = scenario.checks if checks is None else resolve_checks(checks)
    oracle = oracle_for(scenario, tolerance)
    reports = oracle.assess(ladder, ids, threads=threads or scenario.threads)
    for report in reports:
        store.write_json(os.path.join(REPORT_DIR, "{}.json".format(report.bound_id)),
                         report.to_dict())
    store.write_json(os.path.join(REPORT_DIR, "summary.json"), {
        "fingerprint": scenario.fingerprint,
        "epsilon": oracle.tolerance,
        "verdicts": {r.bound_id: r.verdict for r in reports},
        "ladder": {"gaps": ladder.gaps, "converged": ladder.converged},
    })
    failed = failed_ids(reports)
    _log.info("{}: {} checks, {} failed".format(scenario.name, len(reports), len(failed)))
    return reports


def failed_ids(reports):
    return [r.bound_id for r in reports if r.verdict == FAIL]


def export_plots(directory):
    """
    Write plots/<trajectory>_fields.csv (a row per snapshot and node with u,
    v, K and p) and plots/<trajectory>_volume.csv (area per snapshot).

    Returns:
        list of written paths
    """
    store, scenario, _, ladder = load_run(directory)
    written = []
    for trajectory in ladder.all_trajectories():
        frame = trajectory_frame(trajectory, curvature, pressure)
        written.append(store.write_frame(
            os.path.join(PLOT_DIR, "{}_fields.csv".format(trajectory.name)), frame))
        volumes = []
        for snapshot in trajectory.snapshots:
            row = {"trajectory": trajectory.name, "t": snapshot.physical_time,
                   "volume": volume(snapshot)}
            if trajectory in ladder.far_field:
                row["plane_volume"] = far_field_volume(snapshot, scenario.cusp_C)
            elif ladder.axis == PLANE_EXHAUST:
                row["plane_volume"] = plane_volume(snapshot, ladder.probe_radius,
                                                   scenario.cusp_C)
            volumes.append(row)
        written.append(store.write_frame(
            os.path.join(PLOT_DIR, "{}_volume.csv".format(trajectory.name)),
            pd.DataFrame(volumes)))
    _log.info("exported {} plot tables for {}".format(len(written), scenario.name))
    return written
