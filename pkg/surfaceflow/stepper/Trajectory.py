# -*- coding: utf-8 -*-
# Generic/Built-in
import numpy as np

from ..lib.FlowExceptions import GridMismatchError

# Snapshot times closer than this are the same time
TIME_MATCH = 1e-12


class FlowTrajectory(object):
    """
    Time-ordered snapshots of one flow plus solver metadata.

    Parameters:
        snapshots (list): ConformalState, strictly increasing t, first at t = 0
        fingerprint (str): scenario fingerprint the run belongs to
        schedule (dict): description of the boundary schedule
        step_times (list): end time of every accepted step (the time plan)
        step_dts (list): accepted step sizes
        newton_iterations (list): Newton iterations per accepted step
        newton_residuals (list): final normalised residual per accepted step
        snapshot_residuals (list): residual of the step producing each
            snapshot (0 for the initial one)
    """

    def __init__(self, snapshots, fingerprint="", schedule=None, step_times=(),
                 step_dts=(), newton_iterations=(), newton_residuals=(),
                 snapshot_residuals=None, name=""):
        if not snapshots:
            raise GridMismatchError("a trajectory needs at least one snapshot")
        if snapshots[0].t != 0.0:
            raise GridMismatchError("first snapshot must be at t = 0")
        grid = snapshots[0].grid
        offset = snapshots[0].time_offset
        for before, after in zip(snapshots, snapshots[1:]):
            if not after.t > before.t:
                raise GridMismatchError("snapshot times must increase strictly")
            grid.require_same(after.grid, "snapshot")
            if after.time_offset != offset:
                raise GridMismatchError("snapshots disagree on the time offset")
        self.snapshots = list(snapshots)
        self.fingerprint = fingerprint
        self.schedule = dict(schedule or {})
        self.step_times = [float(t) for t in step_times]
        self.step_dts = [float(dt) for dt in step_dts]
        self.newton_iterations = [int(i) for i in newton_iterations]
        self.newton_residuals = [float(r) for r in newton_residuals]
        if snapshot_residuals is None:
            snapshot_residuals = [0.0] * len(snapshots)
        self.snapshot_residuals = [float(r) for r in snapshot_residuals]
        self.name = name

    @property
    def grid(self):
        return self.snapshots[0].grid

    @property
    def time_offset(self):
        return self.snapshots[0].time_offset

    @property
    def initial(self):
        return self.snapshots[0]

    @property
    def final(self):
        return self.snapshots[-1]

    @property
    def times(self):
        return np.array([s.t for s in self.snapshots])

    @property
    def time_plan(self):
        return list(self.step_times)

    def u_matrix(self):
        # (n_snapshots, n_active)
        return np.vstack([s.u.values for s in self.snapshots])

    def v_matrix(self):
        return np.exp(2.0 * self.u_matrix())

    def index_of(self, t):
        times = self.times
        hits = np.flatnonzero(np.abs(times - t) <= TIME_MATCH * max(1.0, abs(t)))
        return int(hits[0]) if hits.size else None

    def snapshot_at(self, t):
        index = self.index_of(t)
        if index is None:
            raise GridMismatchError("no snapshot at t={} in {}".format(t, self.name))
        return self.snapshots[index]

    def shared_times(self, other, scale=1.0):
        # (mine, theirs) snapshot index pairs with other.t == scale * t
        pairs = []
        for i, snapshot in enumerate(self.snapshots):
            j = other.index_of(scale * snapshot.t)
            if j is not None:
                pairs.append((i, j))
        return pairs

    def with_name(self, name):
        self.name = name
        return self

    def __len__(self):
        return len(self.snapshots)

    def __repr__(self):
        return "FlowTrajectory({}, {} snapshots to t={}, {})".format(
            self.name, len(self.snapshots), self.final.t, self.grid)
