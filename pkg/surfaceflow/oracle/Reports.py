# -*- coding: utf-8 -*-
# Generic/Built-in
from dataclasses import dataclass, field, asdict
from typing import Optional

import math

from ..lib.FlowExceptions import ScenarioValidationError

PASS = "pass"
FAIL = "fail"
SKIPPED = "skipped"

# Stable bound ids, in report order
REGISTRY = (
    "K_lower",
    "K_upper_neg",
    "K_upper_pos",
    "K_upper_zero",
    "AB_estimate",
    "u_lower_hyp",
    "u_upper_hyp",
    "u_vs_u0_neg",
    "u_vs_u0_pos",
    "u_vs_u0_zero",
    "u_lower_cusp",
    "vol_law",
    "eigen_barrier",
    "comparison",
    "scaling_symmetry",
)


def resolve_checks(checks):
    """Expand "all" and validate ids; returns ids in registry order."""
    if checks in ("all", None):
        return list(REGISTRY)
    if isinstance(checks, str):
        checks = [c.strip() for c in checks.split(",") if c.strip()]
    unknown = sorted(set(checks) - set(REGISTRY))
    if unknown:
        raise ScenarioValidationError("unknown bound ids {}".format(unknown))
    return [c for c in REGISTRY if c in set(checks)]


@dataclass
class BoundReport:
    """
    Worst slack of one inequality over checked nodes and times. Positive
    slack means the inequality holds with margin; the verdict is pass iff
    slack >= -tolerance.
    """
    bound_id: str
    worst_slack: Optional[float]
    tolerance: float
    verdict: str
    node: Optional[int] = None
    radius: Optional[float] = None
    time: Optional[float] = None
    excluded: int = 0
    note: str = ""
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.bound_id not in REGISTRY:
            raise ScenarioValidationError("unknown bound id {}".format(self.bound_id))

    @classmethod
    def measured(cls, bound_id, slack, tolerance, node=None, radius=None, time=None,
                 excluded=0, note="", details=None):
        if slack is None or not math.isfinite(slack):
            return cls.skipped(bound_id, note or "no checked nodes", tolerance)
        verdict = PASS if slack >= -tolerance else FAIL
        return cls(bound_id, float(slack), float(tolerance), verdict,
                   None if node is None else int(node),
                   None if radius is None else float(radius),
                   None if time is None else float(time),
                   int(excluded), note, dict(details or {}))

    @classmethod
    def skipped(cls, bound_id, note, tolerance=0.0, details=None):
        return cls(bound_id, None, float(tolerance), SKIPPED, note=note,
                   details=dict(details or {}))

    @property
    def failed(self):
        return self.verdict == FAIL

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, table):
        return cls(**table)
