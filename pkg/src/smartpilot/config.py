"""Flat ``key = value`` run configuration.

Precedence is command-line flags, then the config file, then defaults. The
defaults are the Table-I style system parameters: 7 cells, 8 users per
cell, 500 m radius, path-loss exponent 3, 8 dB shadowing, 20 dB cell-edge
SNR and 0 dBm pilot and data power.
"""

import dataclasses
from dataclasses import dataclass

from .errors import ConfigurationError
from .experiment import STRATEGIES, Scenario
from .fading import SystemConfig
from .geometry import SUPPORTED_CELL_COUNTS

AUTO = "auto"


@dataclass(frozen=True)
class RunConfig:
    cells: int = 7
    users_per_cell: int = 8
    cell_radius: float = 500.0
    path_loss_exponent: float = 3.0
    shadow_sigma_db: float = 8.0
    cell_edge_snr_db: float = 20.0
    pilot_power_dbm: float = 0.0
    data_power_dbm: float = 0.0
    min_distance_ratio: float = 0.1
    antennas: tuple | None = None  # None: per-command default
    trials: int | None = None
    seed: int = 0
    strategies: tuple | None = None
    target_cell: int = 0
    max_sweeps: int = 10
    k_max_exhaustive: int = 9
    cdf_min_db: float = -60.0
    cdf_max_db: float = 30.0
    cdf_step_db: float = 0.25
    out: str = "results"
    write_json: bool = True
    verbosity: int = 0

    def system_config(self):
        return SystemConfig.from_dbm(
            pilot_power_dbm=self.pilot_power_dbm,
            data_power_dbm=self.data_power_dbm,
            cell_edge_snr_db=self.cell_edge_snr_db,
            path_loss_exponent=self.path_loss_exponent,
            shadow_sigma_db=self.shadow_sigma_db,
        )

    def scenario(self, antennas, trials, strategies):
        """Scenario for one command, filling ``auto`` fields with its defaults."""
        return Scenario(
            cells=self.cells,
            users=self.users_per_cell,
            antennas=tuple(self.antennas or antennas),
            radius=self.cell_radius,
            cfg=self.system_config(),
            trials=self.trials or trials,
            seed=self.seed,
            strategies=tuple(self.strategies or strategies),
            target_cell=self.target_cell,
            max_sweeps=self.max_sweeps,
            k_max_exhaustive=self.k_max_exhaustive,
            min_distance_ratio=self.min_distance_ratio,
        )


_FIELDS = {f.name: f for f in dataclasses.fields(RunConfig)}
_INT_TUPLES = {"antennas"}
_STR_TUPLES = {"strategies"}
_OPTIONAL = {"antennas", "trials", "strategies"}


def _field_kind(name):
    if name in _INT_TUPLES:
        return "ints"
    if name in _STR_TUPLES:
        return "strs"
    default = _FIELDS[name].default
    if name == "trials":
        return int
    return type(default)


def parse_value(name, text):
    """Convert the text of one value to the type of field ``name``."""
    text = text.strip()
    if name in _OPTIONAL and text.lower() == AUTO:
        return None
    kind = _field_kind(name)
    try:
        if kind == "ints":
            return tuple(int(v) for v in text.split(",") if v.strip())
        if kind == "strs":
            return tuple(v.strip() for v in text.split(",") if v.strip())
        if kind is bool:
            lowered = text.lower()
            if lowered in ("true", "yes", "1", "on"):
                return True
            if lowered in ("false", "no", "0", "off"):
                return False
            raise ValueError(text)
        if kind is int:
            return int(text)
        if kind is float:
            return float(text)
        return text
    except ValueError:
        raise ConfigurationError(f"cannot parse {name} = {text!r}") from None


def format_value(value):
    if value is None:
        return AUTO
    if isinstance(value, tuple):
        return ",".join(str(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value).lower() if isinstance(value, bool) else str(value)


def format_config(config):
    return "".join(
        f"{name} = {format_value(getattr(config, name))}\n" for name in _FIELDS
    )


def read_config_text(text):
    """Parse config text into ``({field: value}, {field: line number})``."""
    values, lines = {}, {}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(f"expected 'key = value', got {raw.strip()!r}", number)
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _FIELDS:
            raise ConfigurationError(f"unknown key {key!r}", number)
        try:
            values[key] = parse_value(key, value)
        except ConfigurationError as exc:
            raise ConfigurationError(str(exc), number) from None
        lines[key] = number
    return values, lines


def validate(config, lines=None):
    lines = lines or {}

    def fail(key, message):
        raise ConfigurationError(f"{key}: {message}", lines.get(key))

    if config.cells not in SUPPORTED_CELL_COUNTS:
        fail("cells", f"L must be one of {SUPPORTED_CELL_COUNTS}, got {config.cells}")
    if config.users_per_cell < 1:
        fail("users_per_cell", f"K >= 1 required, got {config.users_per_cell}")
    if not config.cell_radius > 0:
        fail("cell_radius", f"R > 0 required, got {config.cell_radius}")
    if config.shadow_sigma_db < 0:
        fail("shadow_sigma_db", "must be >= 0")
    if not 0 <= config.min_distance_ratio < 0.8:
        fail("min_distance_ratio", "must lie in [0, 0.8)")
    if config.antennas is not None and (not config.antennas or min(config.antennas) < 1):
        fail("antennas", f"every M must be >= 1, got {config.antennas}")
    if config.trials is not None and config.trials < 1:
        fail("trials", f"must be >= 1, got {config.trials}")
    if config.strategies is not None:
        unknown = sorted(set(config.strategies) - set(STRATEGIES))
        if unknown or not config.strategies:
            fail("strategies", f"unknown {unknown}; choose from {', '.join(STRATEGIES)}")
    if not 0 <= config.target_cell < config.cells:
        fail("target_cell", f"must lie in 0..{config.cells - 1}")
    if config.max_sweeps < 1:
        fail("max_sweeps", "must be >= 1")
    if config.k_max_exhaustive < 1:
        fail("k_max_exhaustive", "must be >= 1")
    if not config.cdf_step_db > 0 or config.cdf_max_db <= config.cdf_min_db:
        fail("cdf_step_db", "need cdf_step_db > 0 and cdf_max_db > cdf_min_db")
    return config


def parse_config(path=None, overrides=None):
    """Build a RunConfig from an optional file and flag overrides."""
    values, lines = {}, {}
    if path is not None:
        with open(path, encoding="utf-8") as fh:
            values, lines = read_config_text(fh.read())
    for key, value in (overrides or {}).items():
        if key not in _FIELDS:
            raise ConfigurationError(f"unknown key {key!r}")
        if value is not None:
            values[key] = value
            lines.pop(key, None)
    return validate(RunConfig(**values), lines)
