"""Declarative experiment configs: flat INI-style ``key = value`` sections.

A config names one experiment and pins everything needed to reproduce it,
including the seed (there is no wall-clock default).  Example::

    [experiment]
    name = slicing
    seed = 1234

    [system]
    amplitude = 0.78539816339744831
    crosstalk = 0.05

    [twirl]
    mode = full

    [noise]
    d1 = t1 0 0.001
    d2 = t1 1 0.001

    [sweep]
    slices = 1,2,4,8,16,32

    [output]
    dir = out

Sweep values are either comma lists (``1,2,4``) or inclusive linear ranges
``start:stop:count`` (``0.99:1.01:41``).  Noise entries read
``t1 <qubit> <rate>``.  The config hash covers every section except
``[output]``, so moving results elsewhere does not change the emitted bytes.
"""

from __future__ import annotations

import configparser
import hashlib
from dataclasses import dataclass, field

__all__ = [
    "EXPERIMENT_NAMES",
    "ConfigParseError",
    "ConfigValidationError",
    "ExperimentConfig",
    "load_config",
    "parse_grid",
    "config_hash",
]

EXPERIMENT_NAMES = ("slicing", "hermitianizer", "ising-kik", "calibration", "identities")


class ConfigParseError(Exception):
    """The file is not readable INI text."""


class ConfigValidationError(Exception):
    """A field is missing or invalid; ``path`` locates it as ``[section] key``."""

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}")


@dataclass(frozen=True)
class ExperimentConfig:
    """Parsed, validated experiment description."""

    name: str
    seed: int
    system: dict = field(default_factory=dict)
    twirl: dict | None = None
    noise_entries: tuple = ()
    sweep: dict = field(default_factory=dict)
    out_dir: str | None = None


def parse_grid(text: str, path: str) -> list[float]:
    """Parse a sweep value: comma list or ``start:stop:count`` range."""
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ConfigValidationError(path, f"range must be start:stop:count, got {text!r}")
        try:
            start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
        except ValueError as exc:
            raise ConfigValidationError(path, f"bad range {text!r}") from exc
        if count < 1:
            raise ConfigValidationError(path, "range count must be positive")
        if count == 1:
            return [start]
        step = (stop - start) / (count - 1)
        return [start + i * step for i in range(count)]
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise ConfigValidationError(path, f"bad list {text!r}") from exc


def _parse_noise_entry(key: str, value: str) -> tuple[str, int, float]:
    path = f"[noise] {key}"
    parts = value.split()
    if len(parts) != 3:
        raise ConfigValidationError(path, f"expected 'type qubit rate', got {value!r}")
    kind, qubit_s, rate_s = parts
    if kind != "t1":
        raise ConfigValidationError(path, f"unsupported noise type {kind!r} (only 't1')")
    try:
        qubit, rate = int(qubit_s), float(rate_s)
    except ValueError as exc:
        raise ConfigValidationError(path, f"bad qubit/rate in {value!r}") from exc
    if rate < 0:
        raise ConfigValidationError(path, "rate must be nonnegative")
    return kind, qubit, rate


def _parse_twirl(section) -> dict:
    mode = section.get("mode", "").strip()
    if mode not in ("full", "sampled"):
        raise ConfigValidationError("[twirl] mode", f"must be 'full' or 'sampled', got {mode!r}")
    out: dict = {"mode": mode}
    if "count" in section:
        try:
            out["count"] = int(section["count"])
        except ValueError as exc:
            raise ConfigValidationError("[twirl] count", "must be an integer") from exc
        if out["count"] < 1:
            raise ConfigValidationError("[twirl] count", "must be positive")
    elif mode == "sampled":
        raise ConfigValidationError("[twirl] count", "required for sampled plans")
    if "seed" in section:
        try:
            out["seed"] = int(section["seed"])
        except ValueError as exc:
            raise ConfigValidationError("[twirl] seed", "must be an integer") from exc
    return out


def load_config(path: str) -> ExperimentConfig:
    """Read and validate a config file.

    Raises :class:`ConfigParseError` for unreadable INI text and
    :class:`ConfigValidationError` (with a field path) for bad content.
    """
    parser = configparser.ConfigParser(interpolation=None)
    try:
        with open(path, "r", encoding="utf-8") as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise ConfigParseError(f"cannot read {path}: {exc}") from exc
    except configparser.Error as exc:
        raise ConfigParseError(f"cannot parse {path}: {exc}") from exc

    if not parser.has_section("experiment"):
        raise ConfigValidationError("[experiment]", "section is required")
    exp = parser["experiment"]
    name = exp.get("name", "").strip()
    if name not in EXPERIMENT_NAMES:
        raise ConfigValidationError(
            "[experiment] name", f"must be one of {', '.join(EXPERIMENT_NAMES)}, got {name!r}"
        )
    if "seed" not in exp:
        raise ConfigValidationError("[experiment] seed", "required (no wall-clock default)")
    try:
        seed = int(exp["seed"])
    except ValueError as exc:
        raise ConfigValidationError("[experiment] seed", "must be an integer") from exc

    system: dict = {}
    if parser.has_section("system"):
        for key, value in parser["system"].items():
            system[key] = value.strip()

    twirl = _parse_twirl(parser["twirl"]) if parser.has_section("twirl") else None

    noise_entries = []
    if parser.has_section("noise"):
        for key, value in parser["noise"].items():
            noise_entries.append(_parse_noise_entry(key, value))

    sweep: dict = {}
    if parser.has_section("sweep"):
        for key, value in parser["sweep"].items():
            sweep[key] = value.strip()

    out_dir = None
    if parser.has_section("output"):
        out_dir = parser["output"].get("dir", "").strip() or None

    return ExperimentConfig(
        name=name,
        seed=seed,
        system=system,
        twirl=twirl,
        noise_entries=tuple(noise_entries),
        sweep=sweep,
        out_dir=out_dir,
    )


def config_hash(cfg: ExperimentConfig) -> str:
    """SHA-256 over the canonical content (everything but the output section)."""
    lines = [f"experiment.name={cfg.name}", f"experiment.seed={cfg.seed}"]
    lines += [f"system.{k}={cfg.system[k]}" for k in sorted(cfg.system)]
    if cfg.twirl is not None:
        lines += [f"twirl.{k}={cfg.twirl[k]}" for k in sorted(cfg.twirl)]
    lines += [f"noise.{i}={kind} {qubit} {rate!r}" for i, (kind, qubit, rate) in enumerate(cfg.noise_entries)]
    lines += [f"sweep.{k}={cfg.sweep[k]}" for k in sorted(cfg.sweep)]
    return hashlib.sha256("\n".join(lines).encode()).hexdigest()
