"""Experiment configuration: one flat key/value section, file <-> flags <-> dict.

Every run is fully determined by an ExperimentConfig; reports embed the
resolved config as ``# cfg:key = value`` comment lines, and from_file
accepts such a report back, so any output can be reproduced from itself.
"""

from __future__ import annotations

import configparser
import io
from dataclasses import asdict, dataclass, fields, replace

from .errors import ConfigError

SECTION = "experiment"


@dataclass(frozen=True)
class ExperimentConfig:
    preset: str = "lps5"
    k: int | None = None  # optional cross-check against the preset
    theta: float = 0.5
    two_j_max: int = 50  # scan truncation, in two_j units (J = two_j_max / 2)
    n_min: int = 0
    n_max: int = 10
    n1: str = "half"  # split rule for the two-term bound: "half" or an integer
    mc_samples: int = 0  # > 0 adds Monte Carlo cross-check columns
    clt_n: int = 1024
    clt_samples: int = 10000
    bins: int = 41
    seed: int = 20250810
    cap: int = 10_000_000
    gk_tol: float = 1e-10
    gk_max_lag: int = 256
    observable_f: str = "character:1"
    observable_g: str = "character:1"
    out_dir: str = "out"
    output_format: str = "csv"
    workers: int = 1

    def validate(self):
        if not 0.0 < self.theta < 1.0:
            raise ConfigError("theta", f"{self.theta} outside (0, 1)")
        if self.two_j_max < 1:
            raise ConfigError("two_j_max", "must be >= 1")
        if self.n_min < 0:
            raise ConfigError("n_min", "must be >= 0")
        if self.n_max < self.n_min:
            raise ConfigError("n_max", f"{self.n_max} < n_min {self.n_min}")
        if self.n1 != "half":
            try:
                v = int(self.n1)
            except ValueError:
                raise ConfigError("n1", f"{self.n1!r} is neither 'half' nor an integer")
            if v < 0:
                raise ConfigError("n1", "must be >= 0")
        if self.mc_samples < 0:
            raise ConfigError("mc_samples", "must be >= 0")
        if self.clt_n < 1:
            raise ConfigError("clt_n", "must be >= 1")
        if self.clt_samples < 1:
            raise ConfigError("clt_samples", "must be >= 1")
        if self.bins < 1:
            raise ConfigError("bins", "must be >= 1")
        if self.cap < 1:
            raise ConfigError("cap", "must be >= 1")
        if self.gk_tol <= 0:
            raise ConfigError("gk_tol", "must be > 0")
        if self.gk_max_lag < 1:
            raise ConfigError("gk_max_lag", "must be >= 1")
        if self.output_format not in ("csv", "json"):
            raise ConfigError("output_format", f"{self.output_format!r} not in (csv, json)")
        if self.workers < 1:
            raise ConfigError("workers", "must be >= 1")
        return self

    def n_split(self, n: int) -> int:
        return n // 2 if self.n1 == "half" else min(int(self.n1), n)

    def as_dict(self) -> dict:
        return asdict(self)

    def with_overrides(self, **overrides) -> "ExperimentConfig":
        clean = {k: v for k, v in overrides.items() if v is not None}
        unknown = set(clean) - {f.name for f in fields(self)}
        if unknown:
            raise ConfigError(sorted(unknown)[0], "unknown configuration key")
        return replace(self, **clean).validate()


def format_value(value) -> str:
    """Canonical text form of a config value (round-trips through parsing)."""
    if value is None:
        return "none"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _parse_value(name: str, raw: str):
    hints = {f.name: f.type for f in fields(ExperimentConfig)}
    hint = hints[name]
    raw = raw.strip()
    try:
        if hint == "int | None":
            return None if raw.lower() == "none" else int(raw)
        if hint == "int":
            return int(raw)
        if hint == "float":
            return float(raw)
        return raw
    except ValueError as exc:
        raise ConfigError(name, f"cannot parse {raw!r}: {exc}") from exc


def to_text(cfg: ExperimentConfig) -> str:
    lines = [f"[{SECTION}]"]
    for name, value in sorted(cfg.as_dict().items()):
        lines.append(f"{name} = {format_value(value)}")
    return "\n".join(lines) + "\n"


def from_text(text: str) -> ExperimentConfig:
    parser = configparser.ConfigParser()
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError("config", f"cannot parse config: {exc}") from exc
    if SECTION not in parser:
        raise ConfigError("config", f"missing [{SECTION}] section")
    values = {}
    known = {f.name for f in fields(ExperimentConfig)}
    for name, raw in parser[SECTION].items():
        if name not in known:
            raise ConfigError(name, "unknown configuration key")
        values[name] = _parse_value(name, raw)
    return ExperimentConfig(**values).validate()


def from_file(path) -> ExperimentConfig:
    """Read a config file, or recover the embedded config of a report file."""
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError("config", f"cannot read {path}: {exc}") from exc
    embedded = [
        line[len("# cfg:") :]
        for line in text.splitlines()
        if line.startswith("# cfg:")
    ]
    if embedded:
        return from_text(f"[{SECTION}]\n" + "\n".join(embedded) + "\n")
    return from_text(text)


def from_dict(values: dict) -> ExperimentConfig:
    return ExperimentConfig().with_overrides(**values)
