"""
Run configuration.
Merges settings.py defaults, RMHD_* environment variables, a flat key=value
config file and command-line overrides into a RunConfig.
"""
import logging
import os
from dataclasses import dataclass, fields, replace
from typing import Optional

from dotenv import dotenv_values

import settings
from core.errors import ConfigError
from core.limiters import INDICATORS, LimiterConfig
from core.physics import SIGNAL_SPEEDS
from core.solver import FLUX_MODES

logger = logging.getLogger(__name__)

ENV_PREFIX = "RMHD_"

# Alternative spellings accepted in files and the environment.
KEY_ALIASES = {
    "tend": "t_end",
    "tvb_m": "tvb_M",
    "tvb-m": "tvb_M",
    "out": "out_dir",
    "degree": "r",
    "database": "database_url",
}


@dataclass(frozen=True)
class RunConfig:
    """
    Everything a batch command needs. None means "take the preset's value"
    for nx, ny, cfl, t_end, tvb_M, variable, ladder, signal_speed and
    entropy_guard; workers None means one per available CPU.
    """
    problem: str = "alfven1d"
    nx: Optional[int] = None
    ny: Optional[int] = None
    r: int = settings.DEFAULT_DEGREE
    cfl: Optional[float] = None
    t_end: Optional[float] = None
    tvb_M: Optional[float] = None
    limiter: bool = True
    characteristic: bool = False
    indicator: Optional[str] = None
    kxrcf_threshold: float = settings.DEFAULT_KXRCF_THRESHOLD
    pcp_epsilon: float = settings.DEFAULT_PCP_EPSILON
    flux: str = settings.DEFAULT_FLUX
    workers: Optional[int] = None
    deterministic: bool = False
    seed: int = settings.DEFAULT_SEED
    samples: int = settings.DEFAULT_SAMPLES
    out_dir: str = settings.DEFAULT_OUT_DIR
    database_url: str = settings.DEFAULT_DATABASE_URL
    ladder: Optional[tuple] = None
    variable: Optional[str] = None
    signal_speed: Optional[str] = None
    entropy_guard: Optional[bool] = None

    def __post_init__(self):
        if self.flux not in FLUX_MODES:
            raise ConfigError(f"Unknown flux mode: {self.flux} (choose from {', '.join(FLUX_MODES)})")
        if self.cfl is not None and self.cfl <= 0.0:
            raise ConfigError(f"CFL number must be positive, got {self.cfl}")
        if self.t_end is not None and self.t_end < 0.0:
            raise ConfigError(f"Final time must be non-negative, got {self.t_end}")
        if self.workers is not None and self.workers < 1:
            raise ConfigError(f"Worker count must be at least 1, got {self.workers}")
        if self.samples < 0:
            raise ConfigError(f"Sample count must be non-negative, got {self.samples}")
        if self.indicator is not None and self.indicator not in INDICATORS:
            raise ConfigError(f"Unknown trouble-cell indicator: {self.indicator}")
        if self.signal_speed is not None and self.signal_speed not in SIGNAL_SPEEDS:
            raise ConfigError(f"Unknown signal speed estimate: {self.signal_speed} (choose from {', '.join(SIGNAL_SPEEDS)})")
        for name in ("nx", "ny"):
            value = getattr(self, name)
            if value is not None and value < 1:
                raise ConfigError(f"{name} must be a positive integer, got {value}")

    def cells(self, default: tuple) -> tuple:
        """Mesh cells: nx / ny when set, the preset otherwise."""
        cells = list(default)
        if self.nx is not None:
            cells[0] = self.nx
        if len(cells) > 1:
            if self.ny is not None:
                cells[1] = self.ny
            elif self.nx is not None and default[0] == default[1]:
                # Square presets stay square.
                cells[1] = self.nx
        return tuple(cells)

    def stepping(self, problem) -> dict:
        """cfl, signal_speed and entropy_slack keyword arguments for integrate()."""
        cfl = self.cfl if self.cfl is not None else (problem.cfl or settings.DEFAULT_CFL)
        guard = problem.entropy_guard if self.entropy_guard is None else self.entropy_guard
        return {
            "cfl": cfl,
            "signal_speed": self.signal_speed or problem.signal_speed,
            "entropy_slack": settings.ENTROPY_SLACK if guard else None,
        }

    def limiter_config(self, preset: LimiterConfig) -> LimiterConfig:
        """The preset limiter with this run's overrides applied."""
        return replace(
            preset,
            enabled=preset.enabled and self.limiter,
            pcp=preset.pcp and self.limiter,
            tvb_M=preset.tvb_M if self.tvb_M is None else self.tvb_M,
            characteristic=self.characteristic,
            indicator=preset.indicator if self.indicator is None else self.indicator,
            kxrcf_threshold=self.kxrcf_threshold,
            pcp_epsilon=self.pcp_epsilon,
        )


_FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}

_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


def _canonical_key(key: str) -> str:
    key = key.strip()
    key = KEY_ALIASES.get(key, KEY_ALIASES.get(key.lower(), key))
    if key not in _FIELD_TYPES:
        lowered = {name.lower(): name for name in _FIELD_TYPES}
        key = lowered.get(key.lower().replace("-", "_"), key)
    if key not in _FIELD_TYPES:
        raise ConfigError(f"Unknown config key: {key}")
    return key


def _parse_value(key: str, raw):
    """Converts a string from a file or the environment to the field's type."""
    if raw is None or not isinstance(raw, str):
        return raw
    text = raw.strip()
    kind = _FIELD_TYPES[key]
    try:
        if key == "ladder":
            return tuple(int(v) for v in text.replace(";", ",").split(",") if v.strip())
        if kind in (bool, "bool") or key == "entropy_guard":
            lowered = text.lower()
            if lowered in _TRUE:
                return True
            if lowered in _FALSE:
                return False
            raise ValueError(text)
        if kind in (int, "int") or key in ("nx", "ny", "workers"):
            return int(text)
        if kind in (float, "float") or key in ("cfl", "t_end", "tvb_M"):
            return float(text)
    except ValueError:
        raise ConfigError(f"Invalid value for {key}: {raw!r}") from None
    return text


def _from_mapping(values: dict, source: str) -> dict:
    parsed = {}
    for raw_key, raw in values.items():
        key = _canonical_key(raw_key)
        parsed[key] = _parse_value(key, raw)
        logger.debug("config %s from %s", key, source)
    return parsed


def _from_environment(environ) -> dict:
    found = {}
    for name in _FIELD_TYPES:
        value = environ.get(ENV_PREFIX + name.upper())
        if value is not None and value != "":
            found[name] = _parse_value(name, value)
    return found


def load_config(path: Optional[str] = None, overrides: Optional[dict] = None, environ=None) -> RunConfig:
    """
    Builds a RunConfig. Precedence, strongest first: overrides (flags), the
    config file, RMHD_* environment variables, settings.py defaults.
    Preset defaults fill what is still None when the run starts.
    """
    environ = os.environ if environ is None else environ
    merged = _from_environment(environ)

    if path:
        if not os.path.exists(path):
            raise ConfigError(f"Config file not found: {path}")
        merged.update(_from_mapping(dotenv_values(path), path))

    for key, value in (overrides or {}).items():
        if value is None:
            continue
        canonical = _canonical_key(key)
        merged[canonical] = _parse_value(canonical, value)

    try:
        return RunConfig(**merged)
    except TypeError as exc:
        raise ConfigError(f"Invalid configuration: {exc}") from None


def resolve_workers(config: RunConfig) -> int:
    """Worker processes for ladders: 1 in deterministic mode."""
    if config.deterministic:
        return 1
    if config.workers is not None:
        return config.workers
    return os.cpu_count() or 1
