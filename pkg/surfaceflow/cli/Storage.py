# -*- coding: utf-8 -*-
# Generic/Built-in
import json
import os
import threading

import numpy as np
import pandas as pd

from ..lib.FlowComponent import FlowComponent
from ..lib.FlowExceptions import FingerprintMismatchError
from ..lib.FlowSeal import FlowSeal
from ..fields.Grid import build_grid
from ..fields.ScalarField import ScalarField
from ..metrics.Conformal import ConformalState
from ..stepper.Boundary import closure_of
from ..stepper.Trajectory import FlowTrajectory

# Snapshots are stored as little-endian doubles
DTYPE = "<f8"

SCENARIO_FILE = "scenario.json"
CALIBRATION_FILE = "calibration.json"
LADDER_FILE = "ladder.json"
HEADER_FILE = "header.json"
TRAJECTORY_DIR = "trajectories"
REPORT_DIR = "reports"
PLOT_DIR = "plots"


def snapshot_file(index):
    return "snap_{:05d}.bin".format(index)


def dump_json(payload):
    return json.dumps(payload, indent=2, sort_keys=True, allow_nan=False) + "\n"


class RunStore(FlowComponent):
    """
    Run directory layout:

        scenario.json, calibration.json, ladder.json
        trajectories/<name>/header.json and snap_00000.bin ...
        reports/<bound_id>.json
        plots/*.csv

    Writers may be shared between threads; each file is written whole under
    a lock.
    """

    def __init__(self, root):
        super().__init__()
        self.root = str(root)
        self._write_lock = threading.Lock()

    def path(self, *parts):
        return os.path.join(self.root, *parts)

    # Writers
    def write_bytes(self, relative, payload):
        target = self.path(relative)
        with self._write_lock:
            os.makedirs(os.path.dirname(target) or ".", exist_ok=True)
            with open(target, "wb") as handle:
                handle.write(payload)
        self._log.debug("wrote {} ({} bytes)".format(target, len(payload)))
        return target

    def write_json(self, relative, payload):
        return self.write_bytes(relative, dump_json(payload).encode())

    def write_frame(self, relative, frame):
        return self.write_bytes(relative, frame.to_csv(index=False).encode())

    # Readers
    def read_bytes(self, relative):
        target = self.path(relative)
        try:
            with open(target, "rb") as handle:
                return handle.read()
        except OSError as error:
            raise FingerprintMismatchError("cannot read {}: {}".format(target, error))

    def read_json(self, relative):
        try:
            return json.loads(self.read_bytes(relative).decode())
        except ValueError as error:
            raise FingerprintMismatchError("{} is not valid JSON: {}".format(relative, error))

    def exists(self, relative):
        return os.path.exists(self.path(relative))

    # Trajectories
    def trajectory_files(self, trajectory):
        """
        Serialise a trajectory: (relative path, bytes) pairs for its header
        and one binary file per snapshot.
        """
        payloads = [np.ascontiguousarray(s.u.values, dtype=DTYPE).tobytes()
                    for s in trajectory.snapshots]
        times = [s.t for s in trajectory.snapshots]
        header = {
            "name": trajectory.name,
            "fingerprint": trajectory.fingerprint,
            "grid": trajectory.grid.describe(),
            "time_offset": trajectory.time_offset,
            "schedule": trajectory.schedule,
            "times": times,
            "step_times": trajectory.step_times,
            "step_dts": trajectory.step_dts,
            "newton_iterations": trajectory.newton_iterations,
            "newton_residuals": trajectory.newton_residuals,
            "snapshot_residuals": trajectory.snapshot_residuals,
            "count": len(payloads),
            "dtype": DTYPE,
            "seal": FlowSeal(trajectory.fingerprint)(times, payloads),
        }
        base = os.path.join(TRAJECTORY_DIR, trajectory.name)
        files = [(os.path.join(base, HEADER_FILE), dump_json(header).encode())]
        files += [(os.path.join(base, snapshot_file(i)), payload)
                  for i, payload in enumerate(payloads)]
        return files

    def save_trajectory(self, trajectory):
        for relative, payload in self.trajectory_files(trajectory):
            self.write_bytes(relative, payload)
        self._log.info("saved trajectory {} ({} snapshots)".format(
            trajectory.name, len(trajectory)))

    def load_trajectory(self, name, fingerprint):
        """
        Read a trajectory back and check it against the scenario fingerprint.

        Raises:
            FingerprintMismatchError when the header names another scenario,
            a snapshot file is missing or truncated, or the seal does not
            match the stored content
        """
        base = os.path.join(TRAJECTORY_DIR, name)
        header = self.read_json(os.path.join(base, HEADER_FILE))
        if header.get("fingerprint") != fingerprint:
            raise FingerprintMismatchError(
                "trajectory {} belongs to scenario {} not {}".format(
                    name, str(header.get("fingerprint"))[:12], fingerprint[:12]))
        grid = build_grid(header["grid"]["kind"], header["grid"]["r"], header["grid"]["h"])
        expected = grid.n_active * np.dtype(header["dtype"]).itemsize
        payloads = []
        for index in range(int(header["count"])):
            payload = self.read_bytes(os.path.join(base, snapshot_file(index)))
            if len(payload) != expected:
                raise FingerprintMismatchError(
                    "snapshot {} of {} holds {} bytes, expected {}".format(
                        index, name, len(payload), expected))
            payloads.append(payload)
        times = [float(t) for t in header["times"]]
        if len(times) != len(payloads):
            raise FingerprintMismatchError("{} lists {} times for {} snapshots".format(
                name, len(times), len(payloads)))
        if not FlowSeal(fingerprint).matches(header["seal"], times, payloads):
            raise FingerprintMismatchError("trajectory {} fails its seal".format(name))
        closure = closure_of(header["schedule"])
        snapshots = [
            ConformalState(t, ScalarField(grid, np.frombuffer(payload, dtype=header["dtype"])),
                           header["time_offset"], closure)
            for t, payload in zip(times, payloads)
        ]
        return FlowTrajectory(snapshots, fingerprint, header["schedule"], header["step_times"],
                              header["step_dts"], header["newton_iterations"],
                              header["newton_residuals"], header["snapshot_residuals"],
                              header["name"])

    def trajectory_names(self):
        base = self.path(TRAJECTORY_DIR)
        if not os.path.isdir(base):
            return []
        return sorted(d for d in os.listdir(base)
                      if os.path.exists(os.path.join(base, d, HEADER_FILE)))


def trajectory_frame(trajectory, curvature_of, pressure_of):
    """
    Long table of one trajectory: a row per (snapshot, active node) with
    t, the node position, u, v and, at interior nodes, K and p.
    """
    grid = trajectory.grid
    rows = []
    for snapshot in trajectory.snapshots:
        K = np.full(grid.n_active, np.nan)
        p = np.full(grid.n_active, np.nan)
        K[:grid.n_interior] = curvature_of(snapshot).values
        p[:grid.n_interior] = pressure_of(snapshot).values
        frame = pd.DataFrame({
            "trajectory": trajectory.name,
            "t": snapshot.physical_time,
            "u": snapshot.u.values,
            "v": snapshot.v,
            "K": K,
            "p": p,
        })
        if grid.is_radial:
            frame.insert(2, "r", grid.points[:, 0])
        else:
            frame.insert(2, "x", grid.points[:, 0])
            frame.insert(3, "y", grid.points[:, 1])
        rows.append(frame)
    return pd.concat(rows, ignore_index=True)
