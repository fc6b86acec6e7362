# -*- coding: utf-8 -*-
# Generic/Built-in
from dataclasses import dataclass, field, asdict
from typing import Optional

import logging
import math

try:
    import tomllib
except ImportError:  # Python < 3.11
    import tomli as tomllib

from ..lib.FlowExceptions import ConfigurationError, ScenarioValidationError
from ..lib.FlowSeal import fingerprint as content_fingerprint
from ..fields.Grid import RADIAL, GRID_KINDS
from ..fields.InitialData import InitialData
from ..stepper.Boundary import SCHEDULE_FORMS, RAMP, FROZEN, NONE, FAR_FIELD
from ..stepper.Stepper import DtPolicy
from ..ladder.Ladder import AXES, K_EXHAUST, PLANE_EXHAUST, M_RAMP, SINGLE, parameter_label
from ..oracle.Calibration import CalibrationSpec
from ..oracle.Reports import resolve_checks

_log = logging.getLogger(__name__)

DEFAULT_K_LIST = (2, 4, 8)
DEFAULT_M_LIST = (0, 16, 256, 4096, math.inf)
DEFAULT_R_LIST = (10, 30, 100)
DEFAULT_PROBE_TIMES = (0.1, 0.25, 0.5, 1.0)

TABLES = ("initial", "domain", "ladder", "stepping", "checks", "calibration", "output")


@dataclass(frozen=True)
class Scenario:
    """
    Validated experiment description. Built by ``Scenario.from_dict`` from the
    TOML tables [initial], [domain], [ladder], [stepping], [checks],
    [calibration] and [output]; ``fingerprint`` hashes everything but the
    output settings.
    """
    name: str
    initial: InitialData
    grid_kind: str = RADIAL
    radius: float = 1.0
    n: int = 128
    axis: str = K_EXHAUST
    k: int = 8
    k_list: tuple = DEFAULT_K_LIST
    m_list: tuple = DEFAULT_M_LIST
    m_final: float = math.inf
    R_list: tuple = DEFAULT_R_LIST
    boundary: str = RAMP
    m: float = 0.0
    kappa: float = 0.0
    time_offset: float = 0.0
    policy: DtPolicy = field(default_factory=DtPolicy)
    t_end: float = 1.0
    snapshot_interval: float = 0.05
    checks: tuple = ()
    boundary_layer_cells: float = 2.0
    t_min: float = 0.0
    cusp_C: float = 2.0
    cusp_r0: float = 2.0
    probe_fraction: float = 0.7
    probe_times: tuple = DEFAULT_PROBE_TIMES
    ladder_tol: float = 1e-4
    slope_tol: float = 0.03
    extinction_tol: float = 0.02
    scaling_alpha: float = 0.5
    calibration: CalibrationSpec = field(default_factory=CalibrationSpec)
    seed: Optional[int] = None
    output_dir: str = "runs"
    threads: int = 1
    fingerprint: str = ""

    @property
    def is_radial(self):
        return self.grid_kind == RADIAL

    @property
    def disk_spacing(self):
        # Disk ladders share h = 1/N so every B_{1-1/k} is node aligned
        return 1.0 / self.n

    @property
    def spacing(self):
        # Spacing of the trajectory the bounds are checked on
        if self.axis == SINGLE:
            return self.radius / self.n
        if self.axis == PLANE_EXHAUST:
            return self.R_list[0] / self.n
        return self.disk_spacing

    def wants(self, bound_id):
        return bound_id in self.checks

    def output_times(self):
        times = set()
        if self.snapshot_interval > 0.0:
            count = int(math.floor(self.t_end / self.snapshot_interval + 1e-9))
            times.update(round(i * self.snapshot_interval, 12) for i in range(1, count + 1))
        times.update(t for t in self.probe_times if 0.0 < t <= self.t_end)
        times.add(self.t_end)
        return sorted(t for t in times if 0.0 < t <= self.t_end)

    def to_dict(self):
        """Canonical content: every field except fingerprint and output settings."""
        out = asdict(self)
        for key in ("fingerprint", "output_dir", "threads"):
            out.pop(key)
        out["initial"] = self.initial.to_dict()
        for key in ("k_list", "m_list", "R_list", "checks", "probe_times"):
            out[key] = list(out[key])
        out["m_list"] = [parameter_label(m) for m in out["m_list"]]
        out["m_final"] = parameter_label(out["m_final"])
        out["m"] = parameter_label(out["m"])
        return out

    @classmethod
    def from_dict(cls, table, name=None):
        """
        Validate a parsed scenario table.

        Raises:
            ScenarioValidationError on unknown tables or keys, unknown bound
            ids and parameters outside their documented ranges
        """
        table = dict(table)
        name = table.pop("name", name)
        seed = table.pop("seed", None)
        extra = sorted(set(table) - set(TABLES))
        if extra or not name:
            raise ScenarioValidationError(
                "unknown top-level keys {} or missing name".format(extra))
        sections = {key: _Section(key, table.get(key, {})) for key in TABLES}
        try:
            initial = InitialData.from_dict(sections["initial"].rest())
            domain = sections["domain"]
            ladder = sections["ladder"]
            stepping = sections["stepping"]
            checks = sections["checks"]
            calibration = sections["calibration"]
            output = sections["output"]
            policy = DtPolicy(
                dt0=stepping.get("dt0", None),
                dt_min=float(stepping.get("dt_min", 1e-10)),
                dt_max=float(stepping.get("dt_max", 0.01)),
                grow_after=int(stepping.get("grow_after", 5)),
                easy_iterations=int(stepping.get("easy_iterations", 4)),
                newton_tol=float(stepping.get("newton_tol", 1e-10)),
                max_newton=int(stepping.get("max_newton", 30)))
            kind = domain.get("kind", RADIAL)
            scenario = cls(
                name=str(name),
                initial=initial,
                grid_kind=kind,
                radius=float(domain.get("radius", 1.0)),
                n=int(domain.get("n", 128)),
                axis=ladder.get("axis", K_EXHAUST),
                k=int(ladder.get("k", 8)),
                k_list=tuple(int(k) for k in ladder.get("k_list", DEFAULT_K_LIST)),
                m_list=tuple(float(m) for m in ladder.get("m_list", DEFAULT_M_LIST)),
                m_final=float(ladder.get("m_final", math.inf)),
                R_list=tuple(float(R) for R in ladder.get("R_list", DEFAULT_R_LIST)),
                boundary=ladder.get("boundary", RAMP),
                m=float(ladder.get("m", 0.0)),
                kappa=float(ladder.get("kappa", 0.0)),
                time_offset=float(ladder.get("time_offset", 0.0)),
                policy=policy,
                t_end=float(stepping.get("t_end", 1.0)),
                snapshot_interval=float(stepping.get("snapshot_interval", 0.05)),
                checks=tuple(resolve_checks(checks.get("ids", "all"))),
                boundary_layer_cells=float(checks.get("boundary_layer_cells", 2.0)),
                t_min=float(checks.get("t_min", 0.0)),
                cusp_C=float(checks.get("cusp_C", 2.0)),
                cusp_r0=float(checks.get("cusp_r0", 2.0)),
                probe_fraction=float(checks.get("probe_fraction", 0.7)),
                probe_times=tuple(float(t) for t in
                                  checks.get("probe_times", DEFAULT_PROBE_TIMES)),
                ladder_tol=float(checks.get("ladder_tol", 1e-4)),
                slope_tol=float(checks.get("slope_tol", 0.03)),
                extinction_tol=float(checks.get("extinction_tol", 0.02)),
                scaling_alpha=float(checks.get("scaling_alpha", 0.5)),
                calibration=CalibrationSpec(
                    kind=calibration.get("kind", kind),
                    radius=float(calibration.get("radius", 0.875)),
                    n=int(calibration.get("n", 16)),
                    dt_max=float(calibration.get("dt_max", policy.dt_max)),
                    t_end=float(calibration.get("t_end", 0.5)),
                    safety=float(calibration.get("safety", 2.0))),
                seed=None if seed is None else int(seed),
                output_dir=str(output.get("directory", "runs/{}".format(name))),
                threads=int(output.get("threads", 1)))
            for section in sections.values():
                section.require_consumed()
        except ScenarioValidationError:
            raise
        except (ConfigurationError, TypeError, ValueError) as error:
            raise ScenarioValidationError("scenario {}: {}".format(name, error))
        scenario.validate()
        return scenario.sealed()

    def sealed(self):
        # Same scenario with its content fingerprint filled in
        values = dict(self.__dict__)
        values["fingerprint"] = content_fingerprint(self.to_dict())
        return Scenario(**values)

    def with_output(self, directory=None, threads=None):
        values = dict(self.__dict__)
        if directory is not None:
            values["output_dir"] = str(directory)
        if threads is not None:
            values["threads"] = int(threads)
        return Scenario(**values)

    def validate(self):
        def need(condition, message):
            if not condition:
                raise ScenarioValidationError("scenario {}: {}".format(self.name, message))

        need(self.grid_kind in GRID_KINDS, "unknown grid kind {}".format(self.grid_kind))
        need(self.axis in AXES, "unknown ladder axis {}".format(self.axis))
        need(self.boundary in SCHEDULE_FORMS, "unknown boundary form {}".format(self.boundary))
        need(self.n >= 8, "n must be >= 8")
        need(self.t_end > 0.0, "t_end must be positive")
        need(self.snapshot_interval >= 0.0, "snapshot_interval must be >= 0")
        need(0.0 < self.probe_fraction < 1.0, "probe_fraction must lie in (0, 1)")
        need(self.ladder_tol > 0.0, "ladder_tol must be positive")
        need(self.boundary_layer_cells >= 0.0, "boundary_layer_cells must be >= 0")
        need(self.cusp_C > 0.0 and self.cusp_r0 > 1.0, "cusp needs C > 0 and r0 > 1")
        need(self.threads >= 1, "threads must be >= 1")
        need(self.scaling_alpha > 0.0, "scaling_alpha must be positive")
        if self.axis == M_RAMP:
            need(len(self.m_list) >= 3 and _increasing(self.m_list) and self.m_list[0] >= 0,
                 "m_list must hold >= 3 increasing values >= 0")
            need(self.k >= 2, "k must be >= 2")
            self._need_aligned([self.k], need)
        if self.axis == K_EXHAUST:
            need(len(self.k_list) >= 3 and _increasing(self.k_list) and self.k_list[0] >= 2,
                 "k_list must hold >= 3 increasing values >= 2")
            need(self.m_final >= 0.0, "m_final must be >= 0")
            self._need_aligned(self.k_list, need)
        if self.axis == PLANE_EXHAUST:
            need(self.is_radial, "plane exhaustion runs on radial grids")
            need(len(self.R_list) >= 3 and _increasing(self.R_list),
                 "R_list must hold >= 3 increasing radii")
            need(self.probe_fraction * self.R_list[0] > 1.0,
                 "plane volume region must reach beyond |x| = 1")
            need(self.initial.defined_on_plane,
                 "{} data are not defined on the plane".format(self.initial.form))
            for R in self.R_list:
                cells = R * self.n / self.R_list[0]
                need(abs(cells - round(cells)) < 1e-9, "R_list must be multiples of R_min / n")
        if self.axis == SINGLE:
            need(self.radius > 0.0, "radius must be positive")
            need(self.boundary not in (NONE, FAR_FIELD) or self.is_radial,
                 "{} closure is radial only".format(self.boundary))
        elif self.axis == PLANE_EXHAUST:
            need(self.boundary in (RAMP, FROZEN), "plane ladders use ramp or frozen data")
        else:
            need(self.boundary == RAMP, "disk ladders use ramp boundary data")
        alpha_cells = 1.0 / self.scaling_alpha
        need(abs(alpha_cells - round(alpha_cells)) < 1e-9,
             "scaling_alpha must be 1 / q for a whole q so rescaled nodes align")
        if self.initial.singular_radius() is not None:
            need(self.initial.singular_radius() > self._largest_radius(),
                 "initial data are singular inside the domain")

    def _need_aligned(self, ks, need):
        # B_{1-1/k} must be a whole number of cells of size 1/N on radial grids
        if self.is_radial:
            for k in ks:
                need(self.n % int(k) == 0, "radial grids need k | n, got k={} n={}".format(
                    k, self.n))

    def _largest_radius(self):
        if self.axis == SINGLE:
            return self.radius
        if self.axis == PLANE_EXHAUST:
            return self.R_list[-1]
        if self.axis == M_RAMP:
            return 1.0 - 1.0 / self.k
        return 1.0 - 1.0 / self.k_list[-1]


class _Section(object):
    # One TOML table; tracks which keys were read so typos are reported

    def __init__(self, name, table):
        if not isinstance(table, dict):
            raise ScenarioValidationError("[{}] must be a table".format(name))
        self.name = name
        self.table = dict(table)
        self.used = set()

    def get(self, key, default):
        self.used.add(key)
        return self.table.get(key, default)

    def rest(self):
        self.used.update(self.table)
        return dict(self.table)

    def require_consumed(self):
        unknown = sorted(set(self.table) - self.used)
        if unknown:
            raise ScenarioValidationError("unknown keys in [{}]: {}".format(self.name, unknown))


def _increasing(values):
    return all(b > a for a, b in zip(values, values[1:]))


def parse_scenario(text, name=None):
    try:
        table = tomllib.loads(text)
    except tomllib.TOMLDecodeError as error:
        raise ScenarioValidationError("scenario does not parse: {}".format(error))
    return Scenario.from_dict(table, name)


def load_scenario(path):
    """Read and validate a TOML scenario file."""
    try:
        with open(path, "rb") as handle:
            table = tomllib.load(handle)
    except OSError as error:
        raise ScenarioValidationError("cannot read scenario {}: {}".format(path, error))
    except tomllib.TOMLDecodeError as error:
        raise ScenarioValidationError("scenario {} does not parse: {}".format(path, error))
    scenario = Scenario.from_dict(table)
    _log.info("loaded scenario {} ({})".format(scenario.name, scenario.fingerprint[:12]))
    return scenario


def scenario_from_record(record):
    """Rebuild a Scenario from the scenario.json content written by a run."""
    table = dict(record["scenario"])
    policy = DtPolicy(**table.pop("policy"))
    calibration = CalibrationSpec(**table.pop("calibration"))
    initial = InitialData.from_dict(table.pop("initial"))
    for key in ("k_list", "m_list", "R_list", "checks", "probe_times"):
        table[key] = tuple(table[key])
    table["m_list"] = tuple(float(m) for m in table["m_list"])
    for key in ("m_final", "m"):
        table[key] = float(table[key])
    scenario = Scenario(initial=initial, policy=policy, calibration=calibration,
                        **table).sealed()
    return scenario
