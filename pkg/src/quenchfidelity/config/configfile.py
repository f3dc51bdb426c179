# Loads the run configuration: packaged defaults, then the user's file, then CLI overrides
from configparser import ConfigParser, Error as ConfigParserError, MissingSectionHeaderError, ParsingError
from dataclasses import dataclass
import math
import os
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np

from src.quenchfidelity.core.errors import ConfigError, DomainError
from src.quenchfidelity.dynamics.quench import KGrid
from src.quenchfidelity.models import get_model
from src.quenchfidelity.models.model_spec import ModelSpec
from src.quenchfidelity.modes.mode_analysis import MIN_RESOLUTION
from src.quenchfidelity.modes.scan import Axis

DEFAULTS_FILE = Path(__file__).with_name("defaults.ini")
THREADS_ENV = "QUENCHFIDELITY_THREADS"
OUTPUT_FORMATS = ("csv", "json", "both")


class Config:
    def __init__(self, config_file: Optional[str] = None, overrides: Optional[Dict[str, str]] = None):
        self.config = ConfigParser()
        self.config_file = config_file
        files = [DEFAULTS_FILE]
        if config_file is not None:
            if not Path(config_file).is_file():
                raise ConfigError("config", f"file not found: {config_file}")
            files.append(Path(config_file))
        for path in files:
            self._read(path)
        for key, value in (overrides or {}).items():
            section, option = self._split(key)
            if not self.config.has_section(section):
                self.config.add_section(section)
            self.config.set(section, option, str(value))

    def _read(self, path: Path):
        try:
            self.config.read(path)
        except MissingSectionHeaderError as e:
            raise ConfigError(f"{path}:{e.lineno}", "missing section header") from None
        except ParsingError as e:
            lineno, line = e.errors[0]
            raise ConfigError(f"{path}:{lineno}", f"cannot parse {line!r}") from None
        except ConfigParserError as e:
            raise ConfigError(str(path), str(e)) from None

    @staticmethod
    def _split(key: str) -> Tuple[str, str]:
        section, _, option = key.partition(".")
        if not section or not option:
            raise ConfigError(key, "overrides are written as section.key=value")
        return section, option

    def _raw(self, key: str, required: bool = True) -> Optional[str]:
        section, option = self._split(key)
        value = self.config.get(section, option, fallback=None)
        if value is None or not value.strip():
            if required:
                raise ConfigError(key, "missing required field")
            return None
        return value.strip()

    def _float(self, key: str) -> float:
        raw = self._raw(key)
        try:
            value = float(raw)
        except ValueError:
            raise ConfigError(key, f"expected a number, got {raw!r}") from None
        if not math.isfinite(value):
            raise ConfigError(key, f"must be finite, got {raw!r}")
        return value

    def _int(self, key: str) -> int:
        raw = self._raw(key)
        try:
            return int(raw)
        except ValueError:
            raise ConfigError(key, f"expected an integer, got {raw!r}") from None

    def _floats(self, key: str, required: bool = True) -> Optional[Tuple[float, ...]]:
        raw = self._raw(key, required)
        if raw is None:
            return None
        try:
            values = tuple(float(v) for v in raw.split(","))
        except ValueError:
            raise ConfigError(key, f"expected a comma separated list of numbers, got {raw!r}") from None
        if not all(math.isfinite(v) for v in values):
            raise ConfigError(key, f"all values must be finite, got {raw!r}")
        return values

    def get_model_name(self) -> str:
        return self._raw("model.name")

    def get_gamma_i(self) -> Tuple[float, ...]:
        return self._floats("model.gamma_i")

    def get_gamma_f(self) -> Optional[Tuple[float, ...]]:
        return self._floats("model.gamma_f", required=False)

    def get_lattice_size(self) -> int:
        return self._int("lattice.size")

    def get_thermodynamic_limit(self) -> bool:
        key = "lattice.thermodynamic_limit"
        try:
            return self.config.getboolean("lattice", "thermodynamic_limit", fallback=False)
        except ValueError:
            raise ConfigError(key, f"expected a boolean, got {self._raw(key)!r}") from None

    def get_time_range(self) -> Tuple[float, float, int]:
        return self._float("time.start"), self._float("time.stop"), self._int("time.samples")

    def has_scan(self) -> bool:
        return self.config.has_section("scan") and any(self.config.get("scan", o).strip() for o in self.config.options("scan"))

    def get_scan_axis(self, index: int) -> Tuple[str, Tuple[float, ...], int]:
        prefix = f"scan.axis{index}"
        return self._raw(prefix), self._floats(f"{prefix}_range"), self._int(f"{prefix}_samples")

    def get_k_samples(self) -> int:
        return self._int("resolution.k_samples")

    def get_output_path(self) -> str:
        return self._raw("output.path")

    def get_output_format(self) -> str:
        return self._raw("output.format").lower()

    def get_verify_seed(self) -> int:
        return self._int("verify.seed")

    def get_verify_trials(self) -> Tuple[int, int]:
        return self._int("verify.trials"), self._int("verify.oracle_trials")


@dataclass(frozen=True)
class RunConfig:
    model: ModelSpec
    gamma_i: Tuple[float, ...]
    gamma_f: Optional[Tuple[float, ...]]
    axes: Optional[Tuple[Axis, Axis]]
    lattice_size: int
    thermodynamic_limit: bool
    time_start: float
    time_stop: float
    time_samples: int
    k_samples: int
    output_path: str
    output_format: str
    seed: int
    trials: int
    oracle_trials: int
    workers: int = 1

    @property
    def is_scan(self) -> bool:
        return self.axes is not None

    @property
    def kgrid(self) -> KGrid:
        return KGrid(self.lattice_size)

    @property
    def times(self) -> np.ndarray:
        return np.linspace(self.time_start, self.time_stop, self.time_samples)


def _check(condition: bool, field: str, message: str):
    if not condition:
        raise ConfigError(field, message)


def _axis(config: Config, index: int, model: ModelSpec) -> Axis:
    name, bounds, samples = config.get_scan_axis(index)
    _check(name in model.param_names, f"scan.axis{index}", f"'{name}' is not a parameter of model '{model.name}'")
    _check(len(bounds) == 2, f"scan.axis{index}_range", "expected 'lo, hi'")
    try:
        return Axis(name, bounds[0], bounds[1], samples)
    except DomainError as e:
        raise ConfigError(f"scan.axis{index}_samples", str(e)) from None


def worker_count() -> int:
    raw = os.getenv(THREADS_ENV, "1")
    try:
        workers = int(raw)
    except ValueError:
        raise ConfigError(THREADS_ENV, f"expected an integer, got {raw!r}") from None
    _check(workers >= 1, THREADS_ENV, "must be at least 1")
    return workers


def load_run_config(
    path: Optional[str] = None, overrides: Optional[Dict[str, str]] = None, require: Optional[str] = None
) -> RunConfig:
    """
    Build and validate a RunConfig. `require` is "quench" or "scan" for commands
    that need one of the two run shapes; a config never specifies both.
    """
    config = Config(path, overrides)

    try:
        model = get_model(config.get_model_name())
    except DomainError as e:
        raise ConfigError("model.name", str(e)) from None

    def gamma(key: str, values):
        if values is None:
            return None
        try:
            return model.check_gamma(values, key)
        except DomainError as e:
            raise ConfigError(key, str(e)) from None

    gamma_i = gamma("model.gamma_i", config.get_gamma_i())
    gamma_f = gamma("model.gamma_f", config.get_gamma_f())
    scan = config.has_scan()
    _check(not (gamma_f is not None and scan), "model.gamma_f", "give either gamma_f or a [scan] section, not both")
    if require == "quench":
        _check(gamma_f is not None, "model.gamma_f", "missing required field")
    elif require == "scan":
        _check(scan, "scan.axis1", "missing required field")
    axes = (_axis(config, 1, model), _axis(config, 2, model)) if scan else None
    if axes is not None:
        _check(axes[0].name != axes[1].name, "scan.axis2", "the two scan axes must differ")

    size = config.get_lattice_size()
    _check(size > 0 and size % 2 == 0, "lattice.size", f"must be an even positive integer, got {size}")
    start, stop, samples = config.get_time_range()
    _check(samples >= 1, "time.samples", "must be at least 1")
    _check(stop >= start, "time.stop", "must not be smaller than time.start")
    k_samples = config.get_k_samples()
    _check(k_samples >= MIN_RESOLUTION, "resolution.k_samples", f"must be at least {MIN_RESOLUTION}")
    output_format = config.get_output_format()
    _check(output_format in OUTPUT_FORMATS, "output.format", f"must be one of {', '.join(OUTPUT_FORMATS)}")
    trials, oracle_trials = config.get_verify_trials()
    _check(trials >= 1, "verify.trials", "must be at least 1")
    _check(oracle_trials >= 1, "verify.oracle_trials", "must be at least 1")

    return RunConfig(
        model=model,
        gamma_i=gamma_i,
        gamma_f=gamma_f,
        axes=axes,
        lattice_size=size,
        thermodynamic_limit=config.get_thermodynamic_limit(),
        time_start=start,
        time_stop=stop,
        time_samples=samples,
        k_samples=k_samples,
        output_path=config.get_output_path(),
        output_format=output_format,
        seed=config.get_verify_seed(),
        trials=trials,
        oracle_trials=oracle_trials,
        workers=worker_count(),
    )


def parse_overrides(items: List[str]) -> Dict[str, str]:
    """Turn repeated `section.key=value` CLI options into an override mapping."""
    overrides = {}
    for item in items:
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(item, "overrides are written as section.key=value")
        overrides[key.strip()] = value.strip()
    return overrides
