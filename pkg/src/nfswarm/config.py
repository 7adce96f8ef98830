"""JSON run configuration.

A document has up to four sections, all optional: ``array`` (fields of
:class:`~nfswarm.geometry.ArrayConfig`), ``grid`` (fields of
:class:`~nfswarm.simulation.GridParams`), ``experiment`` (the remaining
fields of :class:`~nfswarm.simulation.ExperimentSpec`) and ``sweep`` (fields
of :class:`SweepParams`). Unknown keys anywhere are rejected.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError, DomainError
from .geometry import ArrayConfig
from .simulation import ExperimentSpec, GridParams
from .snr_analysis import SnrScenario

SECTIONS = ("array", "grid", "experiment", "sweep")
DEFAULT_SPACINGS = tuple(float(v) for v in range(10, 101, 10))
DEFAULT_UAV_COUNTS = tuple(range(1, 17))


@dataclass(frozen=True)
class SweepParams:
    """Scenario and grids of the SNR-versus-geometry sweeps."""

    theta_deg: float = 30.0
    phi_deg: float = 45.0
    range: float = 50.0
    p_bar: float = 1.0
    beta0: float = 1.0
    spacing_grid: tuple = DEFAULT_SPACINGS
    uav_counts: tuple = DEFAULT_UAV_COUNTS

    def __post_init__(self):
        object.__setattr__(self, "spacing_grid", tuple(float(v) for v in self.spacing_grid))
        object.__setattr__(self, "uav_counts", tuple(int(v) for v in self.uav_counts))

    def scenario(self, cfg: ArrayConfig) -> SnrScenario:
        return SnrScenario(cfg, math.radians(self.theta_deg), math.radians(self.phi_deg),
                           self.range, self.p_bar, self.beta0)

    def axis_grid(self, axis: str) -> tuple:
        return self.spacing_grid if axis == "uav_spacing" else self.uav_counts


@dataclass(frozen=True)
class RunConfig:
    cfg: ArrayConfig = field(default_factory=ArrayConfig)
    experiment: ExperimentSpec = field(default_factory=ExperimentSpec)
    sweep: SweepParams = field(default_factory=SweepParams)

    def __post_init__(self):
        if self.experiment.cfg != self.cfg:
            object.__setattr__(self, "experiment", self.experiment.replace(cfg=self.cfg))

    @property
    def grid(self) -> GridParams:
        return self.experiment.grid

    def to_dict(self) -> dict:
        exp = dataclasses.asdict(self.experiment)
        exp.pop("cfg")
        grid = exp.pop("grid")
        return {"array": self.cfg.to_dict(), "grid": grid, "experiment": exp,
                "sweep": dataclasses.asdict(self.sweep)}

    def spec_hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":")).encode()
        return hashlib.sha256(blob).hexdigest()


def _fields(cls, exclude=()) -> set[str]:
    return {f.name for f in dataclasses.fields(cls)} - set(exclude)


def _check_keys(section: str, data, allowed: set[str]):
    if not isinstance(data, dict):
        raise ConfigError(f"section {section!r} must be a JSON object")
    unknown = sorted(set(data) - allowed)
    if unknown:
        raise ConfigError(f"unknown keys in {section!r}: {unknown}; allowed: {sorted(allowed)}")


def config_from_dict(doc: dict) -> RunConfig:
    """Validate a parsed document and build a :class:`RunConfig`."""
    if not isinstance(doc, dict):
        raise ConfigError("configuration must be a JSON object")
    _check_keys("top level", doc, set(SECTIONS))
    array = doc.get("array", {})
    grid = doc.get("grid", {})
    exp = doc.get("experiment", {})
    sweep = doc.get("sweep", {})
    _check_keys("array", array, _fields(ArrayConfig))
    _check_keys("grid", grid, _fields(GridParams))
    _check_keys("experiment", exp, _fields(ExperimentSpec, ("cfg", "grid")))
    _check_keys("sweep", sweep, _fields(SweepParams))
    try:
        cfg = ArrayConfig.from_dict(array)
        spec = ExperimentSpec(cfg=cfg, grid=GridParams(**grid), **exp)
        return RunConfig(cfg=cfg, experiment=spec, sweep=SweepParams(**sweep))
    except (TypeError, DomainError) as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path) -> RunConfig:
    """Read and validate a JSON config; missing or malformed files raise :class:`ConfigError`."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror or exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
    return config_from_dict(doc)


def default_document() -> dict:
    return RunConfig().to_dict()


def _jsonify(obj):
    if isinstance(obj, (tuple, list)):
        return [_jsonify(v) for v in obj]
    if isinstance(obj, dict):
        return {k: _jsonify(v) for k, v in obj.items()}
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def dump_config(rc: RunConfig, path) -> None:
    Path(path).write_text(json.dumps(_jsonify(rc.to_dict()), indent=2, sort_keys=True) + "\n")
