"""Experiment configuration files and result records.

Configs are JSON objects tagged ``"schema_version": 1``. Results are written
as JSON lines with a fixed key order, optionally projected to CSV.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any, Iterable, Optional

from .noise import NoiseError, NoiseParams

SCHEMA_VERSION = 1
EXPERIMENTS = ("cost", "rcnot_sweep", "ghz", "tomography")
BACKENDS = ("exact", "trajectories")
CSV_FIELDS = ("experiment", "kind", "n", "hops", "input", "fidelity", "stderr")


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    experiment: str
    kinds: list[str] = field(default_factory=lambda: ["line", "ring", "star"])
    n_qpus: int = 4
    n_values: Optional[list[int]] = None
    edges: Optional[list[list[int]]] = None
    root: int = 1
    noise: NoiseParams = field(default_factory=NoiseParams)
    backend: str = "exact"
    shots: int = 10000
    seed: Optional[int] = None
    max_hops: int = 4
    hops: int = 1
    output: Optional[str] = None
    schema_version: int = SCHEMA_VERSION

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if self.schema_version != SCHEMA_VERSION:
            raise ConfigError(f"field 'schema_version': unsupported version {self.schema_version!r}, expected 1")
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(
                f"field 'experiment': unknown experiment {self.experiment!r}; options: {', '.join(EXPERIMENTS)}"
            )
        if self.backend not in BACKENDS:
            raise ConfigError(f"field 'backend': unknown backend {self.backend!r}; options: {', '.join(BACKENDS)}")
        if self.backend == "trajectories":
            if self.seed is None:
                raise ConfigError("field 'seed': required for the trajectories backend")
            if self.shots < 1:
                raise ConfigError("field 'shots': must be at least 1")
        if self.experiment == "tomography" and self.backend != "exact":
            raise ConfigError("field 'backend': tomography runs on the exact backend only")
        for k in self.kinds:
            if k not in ("line", "ring", "star", "custom"):
                raise ConfigError(f"field 'kinds': unknown topology kind {k!r}")
        if "custom" in self.kinds and not self.edges:
            raise ConfigError("field 'edges': required for a custom topology")
        if self.n_qpus < 2:
            raise ConfigError("field 'n_qpus': must be at least 2")
        if self.max_hops < 1 or self.hops < 1:
            raise ConfigError("fields 'max_hops'/'hops': must be at least 1")
        if not isinstance(self.noise, NoiseParams):
            raise ConfigError("field 'noise': expected noise parameters")

    def to_dict(self) -> dict:
        out = {"schema_version": self.schema_version, "experiment": self.experiment}
        for f in fields(self):
            if f.name in out:
                continue
            value = getattr(self, f.name)
            out[f.name] = value.to_dict() if isinstance(value, NoiseParams) else value
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        for required in ("schema_version", "experiment"):
            if required not in data:
                raise ConfigError(f"missing required field {required!r}")
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"unknown field(s): {', '.join(unknown)}")
        data = dict(data)
        noise = data.pop("noise", None) or {}
        try:
            params = NoiseParams.from_dict(noise)
        except (NoiseError, TypeError) as exc:
            raise ConfigError(f"field 'noise': {exc}") from None
        return cls(noise=params, **data)


def read_config(path) -> ExperimentConfig:
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    try:
        return ExperimentConfig.from_dict(data)
    except ConfigError as exc:
        raise ConfigError(f"{path}: {exc}") from None


def write_config(config: ExperimentConfig, path) -> None:
    Path(path).write_text(json.dumps(config.to_dict(), indent=2) + "\n")


@dataclass
class FidelityResult:
    experiment: str
    kind: str
    n: int
    hops: Optional[int]
    input: str
    fidelity: float
    stderr: float = 0.0
    params: dict = field(default_factory=dict)
    wall_time_ms: Optional[float] = None

    def __post_init__(self):
        if not 0.0 <= self.fidelity <= 1.0:
            raise ValueError(f"fidelity {self.fidelity} outside [0, 1]")
        if self.stderr < 0:
            raise ValueError("stderr must be non-negative")

    def to_dict(self) -> dict:
        d = {f.name: getattr(self, f.name) for f in fields(self)}
        if d["wall_time_ms"] is None:
            del d["wall_time_ms"]
        return d


@dataclass
class CostRow:
    kind: str
    n: int
    links_formula: Optional[int]
    links_counted: int

    experiment: str = "cost"

    def to_dict(self) -> dict:
        return {
            "experiment": self.experiment,
            "kind": self.kind,
            "n": self.n,
            "links_formula": self.links_formula,
            "links_counted": self.links_counted,
        }


def _record_from_dict(d: dict):
    if d.get("experiment") == "cost":
        return CostRow(d["kind"], d["n"], d["links_formula"], d["links_counted"])
    return FidelityResult(**d)


def format_records(records: Iterable) -> str:
    return "".join(json.dumps(r.to_dict()) + "\n" for r in records)


def write_results(records: Iterable, path) -> None:
    Path(path).write_text(format_records(records))


def read_results(path) -> list:
    out = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        if not line.strip():
            continue
        try:
            out.append(_record_from_dict(json.loads(line)))
        except (json.JSONDecodeError, TypeError, KeyError) as exc:
            raise ConfigError(f"{path}: line {lineno}: bad record ({exc})") from None
    return out


def format_csv(records: Iterable[FidelityResult]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_FIELDS)
    for r in records:
        writer.writerow(["" if getattr(r, f) is None else getattr(r, f) for f in CSV_FIELDS])
    return buf.getvalue()


def params_echo(noise: NoiseParams) -> dict[str, Any]:
    d = noise.to_dict()
    d["theta_F"] = noise.theta_F
    return d
