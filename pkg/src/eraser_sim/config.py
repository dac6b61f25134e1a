"""JSON run configuration.

Example::

    {
      "setup": {
        "S1": {"R": 0.5}, "S2": {"R": 0.5}, "S3": {"R": 0.5},
        "S4": {"R": 0.5, "phase_t": 1.2},
        "delta_phi": 3.14159265,
        "input_mzi": "alpha_bar", "input_det": "gamma_bar"
      },
      "sweep": {"parameter": "phi", "start": 0, "stop": 6.283185307179586, "points": 16, "shots": 0},
      "sample": {"shots": 100000, "seed": 7},
      "bias": {"voltage_volts": 1e-6, "dimensionless": true},
      "duality": {"leads": ["alpha", "gamma"], "dephasing": {"sigma": 1.0, "ensemble": 10000, "seed": 0}},
      "output": {"path": "out.csv", "format": "csv"}
    }

All angles are radians, fields in tesla and areas in m^2. ``S4`` may be
omitted, which gives the single-splitter detector.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any, Optional

from .engine import DET_INPUTS, DET_LEADS, MZI_INPUTS, MZI_LEADS, EraserSetup, FieldGeometry, delta_phi_from_geometry
from .observables import BiasConfig
from .stochastic import SWEEP_PARAMETERS, DephasingModel
from .unitary import BeamSplitterSpec

MODES = ("eval", "sweep", "sample", "duality", "verify-oracle")
FORMATS = ("csv", "json")


class ConfigError(ValueError):
    """Invalid configuration; ``path`` names the offending field."""

    def __init__(self, message: str, path: str = ""):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path


@dataclass(frozen=True)
class SweepBlock:
    parameter: str
    start: float
    stop: float
    points: int
    shots: int = 0
    delta_area: Optional[float] = None

    @property
    def grid(self) -> list[float]:
        if self.points == 1:
            return [self.start]
        step = (self.stop - self.start) / (self.points - 1)
        return [self.start + k * step for k in range(self.points)]


@dataclass(frozen=True)
class SampleBlock:
    shots: int
    seed: int = 0


@dataclass(frozen=True)
class DualityBlock:
    leads: tuple = ("alpha", "gamma")
    dephasing: Optional[DephasingModel] = None


@dataclass(frozen=True)
class OutputBlock:
    path: Optional[str] = None
    format: str = "csv"


@dataclass(frozen=True)
class RunConfig:
    splitters: dict
    delta_phi: Optional[float]
    geometry: Optional[FieldGeometry]
    input_mzi: str = "alpha_bar"
    input_det: str = "gamma_bar"
    mode: Optional[str] = None
    sweep: Optional[SweepBlock] = None
    sample: Optional[SampleBlock] = None
    bias: BiasConfig = field(default_factory=BiasConfig)
    duality: DualityBlock = field(default_factory=DualityBlock)
    output: OutputBlock = field(default_factory=OutputBlock)

    @property
    def resolved_delta_phi(self) -> float:
        if self.geometry is not None:
            return delta_phi_from_geometry(self.geometry)
        return self.delta_phi

    def build_setup(self) -> EraserSetup:
        s = self.splitters
        return EraserSetup.from_specs(
            s["S1"], s["S2"], s["S3"], s.get("S4"),
            delta_phi=self.resolved_delta_phi,
            input_mzi=self.input_mzi,
            input_det=self.input_det,
        )


# --------------------------------------------------------------------------
# field readers


def _obj(d, path) -> dict:
    if not isinstance(d, dict):
        raise ConfigError("expected an object", path)
    return d


def _check_keys(d: dict, allowed, path):
    extra = sorted(set(d) - set(allowed))
    if extra:
        raise ConfigError(f"unknown field(s) {', '.join(extra)}", path)


def _number(d, key, path, default: Any = ..., minimum=None, maximum=None) -> float:
    p = f"{path}.{key}" if path else key
    if key not in d:
        if default is ...:
            raise ConfigError("required field missing", p)
        return default
    v = d[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"expected a number, got {type(v).__name__}", p)
    v = float(v)
    if not math.isfinite(v):
        raise ConfigError("must be finite", p)
    if (minimum is not None and v < minimum) or (maximum is not None and v > maximum):
        lo = "-inf" if minimum is None else repr(minimum)
        hi = "inf" if maximum is None else repr(maximum)
        raise ConfigError(f"value {v!r} out of range [{lo}, {hi}]", p)
    return v


def _integer(d, key, path, default: Any = ..., minimum=None) -> int:
    p = f"{path}.{key}" if path else key
    if key not in d:
        if default is ...:
            raise ConfigError("required field missing", p)
        return default
    v = d[key]
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigError(f"expected an integer, got {type(v).__name__}", p)
    if minimum is not None and v < minimum:
        raise ConfigError(f"value {v} must be >= {minimum}", p)
    return v


def _choice(d, key, path, choices, default: Any = ...) -> str:
    p = f"{path}.{key}" if path else key
    if key not in d:
        if default is ...:
            raise ConfigError("required field missing", p)
        return default
    v = d[key]
    if v not in choices:
        raise ConfigError(f"expected one of {', '.join(choices)}, got {v!r}", p)
    return v


def _splitter(d, path) -> BeamSplitterSpec:
    d = _obj(d, path)
    _check_keys(d, ("R", "phase_r", "phase_t", "phase_global"), path)
    return BeamSplitterSpec(
        R=_number(d, "R", path, minimum=0.0, maximum=1.0),
        phase_r=_number(d, "phase_r", path, 0.0),
        phase_t=_number(d, "phase_t", path, 0.0),
        phase_global=_number(d, "phase_global", path, 0.0),
    )


def _leads(v, path) -> tuple:
    if isinstance(v, str):
        v = [x.strip() for x in v.split(",")]
    if not isinstance(v, list) or len(v) != 2 or v[0] not in MZI_LEADS or v[1] not in DET_LEADS:
        raise ConfigError("expected a lead pair like [\"alpha\", \"gamma\"]", path)
    return tuple(v)


# --------------------------------------------------------------------------


def parse_config(text: str, mode: Optional[str] = None) -> RunConfig:
    """Parse and validate a JSON configuration.

    ``mode`` (normally the CLI subcommand) overrides a missing ``mode`` field
    and must agree with a present one. Mode-specific blocks are required only
    once the mode is known.
    """
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"JSON syntax error at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    root = _obj(raw, "<root>")
    _check_keys(root, ("mode", "setup", "sweep", "sample", "bias", "duality", "output"), "<root>")

    file_mode = root.get("mode")
    if file_mode is not None and file_mode not in MODES:
        raise ConfigError(f"expected one of {', '.join(MODES)}, got {file_mode!r}", "mode")
    if mode is not None and file_mode is not None and mode != file_mode:
        raise ConfigError(f"config says {file_mode!r} but command is {mode!r}", "mode")
    mode = mode or file_mode

    if "setup" not in root:
        raise ConfigError("required block missing", "setup")
    setup = _obj(root["setup"], "setup")
    _check_keys(setup, ("S1", "S2", "S3", "S4", "delta_phi", "geometry", "input_mzi", "input_det"), "setup")
    splitters = {}
    for name in ("S1", "S2", "S3", "S4"):
        if name in setup:
            splitters[name] = _splitter(setup[name], f"setup.{name}")
        elif name != "S4":
            raise ConfigError("required field missing", f"setup.{name}")

    has_dphi, has_geom = "delta_phi" in setup, "geometry" in setup
    if has_dphi and has_geom:
        raise ConfigError("give exactly one of setup.delta_phi and setup.geometry, not both", "setup.delta_phi/setup.geometry")
    if not (has_dphi or has_geom):
        raise ConfigError("one of setup.delta_phi or setup.geometry is required", "setup")
    delta_phi = geometry = None
    if has_dphi:
        delta_phi = _number(setup, "delta_phi", "setup")
    else:
        g = _obj(setup["geometry"], "setup.geometry")
        _check_keys(g, ("H_tesla", "delta_area_m2"), "setup.geometry")
        geometry = FieldGeometry(
            _number(g, "H_tesla", "setup.geometry", minimum=0.0),
            _number(g, "delta_area_m2", "setup.geometry", minimum=0.0),
        )

    sweep = None
    if "sweep" in root:
        s = _obj(root["sweep"], "sweep")
        _check_keys(s, ("parameter", "start", "stop", "points", "shots", "delta_area_m2"), "sweep")
        sweep = SweepBlock(
            parameter=_choice(s, "parameter", "sweep", SWEEP_PARAMETERS),
            start=_number(s, "start", "sweep"),
            stop=_number(s, "stop", "sweep"),
            points=_integer(s, "points", "sweep", minimum=1),
            shots=_integer(s, "shots", "sweep", 0, minimum=0),
            delta_area=_number(s, "delta_area_m2", "sweep", None, minimum=0.0),
        )
        if sweep.points > 1 and sweep.start == sweep.stop:
            raise ConfigError("start and stop must differ for more than one point", "sweep.stop")
        if sweep.parameter.startswith("R") and not (0 <= min(sweep.start, sweep.stop) and max(sweep.start, sweep.stop) <= 1):
            raise ConfigError("reflectance sweep must stay inside [0, 1]", "sweep")
        if sweep.parameter == "H":
            if sweep.delta_area is None and geometry is None:
                raise ConfigError("an H sweep needs sweep.delta_area_m2 or setup.geometry", "sweep.delta_area_m2")
            if min(sweep.start, sweep.stop) < 0:
                raise ConfigError("field must be >= 0", "sweep.start")

    sample = None
    if "sample" in root:
        s = _obj(root["sample"], "sample")
        _check_keys(s, ("shots", "seed"), "sample")
        sample = SampleBlock(_integer(s, "shots", "sample", minimum=0), _integer(s, "seed", "sample", 0, minimum=0))

    bias = BiasConfig()
    if "bias" in root:
        b = _obj(root["bias"], "bias")
        _check_keys(b, ("voltage_volts", "dimensionless"), "bias")
        dimless = b.get("dimensionless", True)
        if not isinstance(dimless, bool):
            raise ConfigError("expected true or false", "bias.dimensionless")
        bias = BiasConfig(voltage=_number(b, "voltage_volts", "bias", 1.0, minimum=0.0), dimensionless_mode=dimless)

    duality = DualityBlock()
    if "duality" in root:
        d = _obj(root["duality"], "duality")
        _check_keys(d, ("leads", "dephasing"), "duality")
        leads = _leads(d["leads"], "duality.leads") if "leads" in d else ("alpha", "gamma")
        deph = None
        if "dephasing" in d:
            j = _obj(d["dephasing"], "duality.dephasing")
            _check_keys(j, ("sigma", "ensemble", "seed"), "duality.dephasing")
            deph = DephasingModel(
                sigma=_number(j, "sigma", "duality.dephasing", minimum=0.0),
                ensemble=_integer(j, "ensemble", "duality.dephasing", 10_000, minimum=1),
                seed=_integer(j, "seed", "duality.dephasing", 0, minimum=0),
            )
        duality = DualityBlock(leads, deph)

    output = OutputBlock()
    if "output" in root:
        o = _obj(root["output"], "output")
        _check_keys(o, ("path", "format"), "output")
        path = o.get("path")
        if path is not None and not isinstance(path, str):
            raise ConfigError("expected a string", "output.path")
        output = OutputBlock(path, _choice(o, "format", "output", FORMATS, "csv"))

    if mode == "sweep" and sweep is None:
        raise ConfigError("mode 'sweep' needs a sweep block", "sweep")
    if mode == "sample" and sample is None:
        raise ConfigError("mode 'sample' needs a sample block", "sample")

    return RunConfig(
        splitters=splitters,
        delta_phi=delta_phi,
        geometry=geometry,
        input_mzi=_choice(setup, "input_mzi", "setup", MZI_INPUTS, "alpha_bar"),
        input_det=_choice(setup, "input_det", "setup", DET_INPUTS, "gamma_bar"),
        mode=mode,
        sweep=sweep,
        sample=sample,
        bias=bias,
        duality=duality,
        output=output,
    )
