"""
Run Configuration Module
Loads the declarative JSON run file, validates its schema and merges it
with command-line flags into a RunConfig.

Precedence: command-line flags > config file > config.py defaults.
"""

import json
import logging
import os
from dataclasses import dataclass, field, fields
from typing import Any, Dict, Optional, Tuple

import config
from modules.errors import ConfigError
from modules.model import Family, Hyperparameters, SamplerConfig
from modules.simgen import Setting, SimSpec
from modules.utils import parse_bool

logger = logging.getLogger(__name__)

COMMANDS = ('fit', 'simulate', 'benchmark', 'repro')
OUTPUT_FORMATS = ('csv', 'json')

# key -> (section, expected type)
SCHEMA = {
    'n_iter': ('sampler', int),
    'burn_in': ('sampler', int),
    'thin': ('sampler', int),
    'seed': ('sampler', int),
    'pliable': ('sampler', bool),
    'store_imputations': ('sampler', bool),
    'sigma0_sq': ('sampler', float),
    'a0': ('sampler', float),
    'b0': ('sampler', float),
    'setting': ('simulation', str),
    'n': ('simulation', int),
    'p': ('simulation', int),
    'q': ('simulation', int),
    'rho_x': ('simulation', float),
    'missing_fraction': ('simulation', float),
    'interactions': ('simulation', bool),
    'n_test': ('simulation', int),
    'family': ('simulation', str),
    'x': ('fit', str),
    'z': ('fit', str),
    'y': ('fit', str),
    'standardize': ('fit', bool),
    'store_draws': ('fit', bool),
    'level': ('fit', float),
    'trace': ('fit', list),
    'acf_max_lag': ('fit', int),
    'holdout_reps': ('fit', int),
    'holdout_size': ('fit', int),
    'n_replications': ('benchmark', int),
    'workers': ('benchmark', int),
    'include_interactions': ('benchmark', bool),
    'out': (None, str),
    'formats': (None, list),
}
SECTIONS = ('sampler', 'simulation', 'fit', 'benchmark')


def _type_ok(value: Any, expected: type) -> bool:
    if expected is float:
        return isinstance(value, (int, float)) and not isinstance(value, bool)
    if expected is int:
        return isinstance(value, int) and not isinstance(value, bool)
    if expected is str:
        # setting may be written as 1..6
        return isinstance(value, (str, int)) and not isinstance(value, bool)
    return isinstance(value, expected)


def flatten_config(raw: dict) -> Dict[str, Any]:
    """Merge section dicts and flat keys into one flat dict (sections last win)."""
    flat = {k: v for k, v in raw.items() if k not in SECTIONS}
    for section in SECTIONS:
        flat.update(raw.get(section) or {})
    return flat


def validate_config_schema(raw) -> Tuple[bool, list]:
    """
    Validate a run config dictionary.

    Args:
        raw: Parsed JSON content

    Returns:
        tuple: (is_valid, error_messages)
    """
    errors = []

    if not isinstance(raw, dict):
        errors.append("Config must be a JSON object")
        return False, errors

    for section in SECTIONS:
        if section in raw and not isinstance(raw[section], dict):
            errors.append(f"Section '{section}' must be an object")
    if errors:
        return False, errors

    items = [(None, k, v) for k, v in raw.items() if k not in SECTIONS]
    for section in SECTIONS:
        items += [(section, k, v) for k, v in (raw.get(section) or {}).items()]

    for section, key, value in items:
        where = f"{section}.{key}" if section else key
        if key not in SCHEMA:
            errors.append(f"Unknown key: {where}")
            continue
        expected_section, expected_type = SCHEMA[key]
        if section is not None and expected_section != section:
            errors.append(f"Key '{key}' belongs in section '{expected_section}', not '{section}'")
        if not _type_ok(value, expected_type):
            errors.append(f"Key '{where}' must be of type {expected_type.__name__}, got {type(value).__name__}")

    if errors:
        return False, errors
    return True, []


def load_config_file(path: str) -> Dict[str, Any]:
    """
    Load and validate a JSON run config.

    Returns:
        dict: Flat key/value mapping

    Raises:
        ConfigError: file missing, unreadable JSON or schema violations
    """
    if not os.path.exists(path):
        raise ConfigError(f"Config file not found: {path}")
    try:
        with open(path, 'r', encoding='utf-8') as f:
            raw = json.load(f)
    except json.JSONDecodeError as e:
        raise ConfigError(f"JSON decode error in {path}: {e}") from None

    is_valid, errors = validate_config_schema(raw)
    if not is_valid:
        raise ConfigError(f"Invalid config {path}: " + "; ".join(errors))
    logger.info(f"Loaded run config from {path}")
    return flatten_config(raw)


def default_workers() -> int:
    """
    Worker count from the HSP_THREADS environment variable, else the CPU count.

    Raises:
        ConfigError: HSP_THREADS is not a positive integer
    """
    raw = os.environ.get(config.WORKERS_ENV)
    if raw is None or not raw.strip():
        return max(1, os.cpu_count() or 1)
    try:
        value = int(raw)
    except ValueError:
        raise ConfigError(f"{config.WORKERS_ENV} must be a positive integer, got {raw!r}") from None
    if value < 1:
        raise ConfigError(f"{config.WORKERS_ENV} must be a positive integer, got {raw!r}")
    return value


@dataclass
class RunConfig:
    """Effective configuration of one command invocation."""

    command: str
    out: str = config.OUTPUT_DIR
    formats: tuple = ('csv',)
    # sampler
    n_iter: int = config.DEFAULT_N_ITER
    burn_in: int = config.DEFAULT_BURN_IN
    thin: int = config.DEFAULT_THIN
    seed: int = config.DEFAULT_SEED
    pliable: bool = True
    store_imputations: bool = False
    sigma0_sq: float = config.SIGMA0_SQ
    a0: float = config.A0
    b0: float = config.B0
    # simulation
    setting: str = 'I'
    n: int = config.DEFAULT_N
    p: int = config.DEFAULT_P
    q: int = config.DEFAULT_Q
    rho_x: float = config.DEFAULT_RHO_X
    missing_fraction: float = 0.0
    interactions: bool = True
    n_test: int = config.DEFAULT_N_TEST
    family: str = Family.GAUSSIAN.value
    # fit
    x: Optional[str] = None
    z: Optional[str] = None
    y: Optional[str] = None
    standardize: bool = False
    store_draws: bool = False
    level: float = config.DEFAULT_LEVEL
    trace: tuple = ()
    acf_max_lag: int = config.DEFAULT_ACF_MAX_LAG
    holdout_reps: int = 0
    holdout_size: int = 0
    # benchmark
    n_replications: Optional[int] = None
    workers: int = field(default_factory=default_workers)
    include_interactions: bool = False
    # repro
    cases: tuple = ()

    def validate(self) -> "RunConfig":
        """
        Check cross-field constraints.

        Raises:
            ConfigError: on the first violated constraint
        """
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command '{self.command}'")
        unknown = set(self.formats) - set(OUTPUT_FORMATS)
        if not self.formats or unknown:
            raise ConfigError(f"output formats must be a non-empty subset of {OUTPUT_FORMATS}")
        try:
            Family(self.family)
        except ValueError:
            raise ConfigError(f"family must be gaussian or binomial, got '{self.family}'") from None
        if not 0.0 < self.level < 1.0:
            raise ConfigError(f"level must lie in (0, 1), got {self.level}")
        if self.acf_max_lag < 0:
            raise ConfigError("acf_max_lag must be non-negative")
        if self.workers < 1:
            raise ConfigError("workers must be positive")

        self.sampler_config()
        self.hyperparameters()
        if self.command == 'fit':
            for key in ('x', 'y'):
                path = getattr(self, key)
                if not path:
                    raise ConfigError(f"fit requires --{key}")
            for key in ('x', 'z', 'y'):
                path = getattr(self, key)
                if path and not os.access(path, os.R_OK):
                    raise ConfigError(f"input file is not readable: {path}")
            if self.holdout_reps < 0 or self.holdout_size < 0:
                raise ConfigError("holdout settings must be non-negative")
            if self.holdout_reps and self.holdout_size < 1:
                raise ConfigError("--holdout-reps needs --holdout-size >= 1")
        if self.command in ('simulate', 'benchmark'):
            self.sim_spec()
        if self.n_replications is not None and self.n_replications < 1:
            raise ConfigError("n_replications must be >= 1")
        return self

    def sampler_config(self, seed: Optional[int] = None) -> SamplerConfig:
        return SamplerConfig(n_iter=self.n_iter, burn_in=self.burn_in,
                             seed=self.seed if seed is None else seed, thin=self.thin,
                             pliable=self.pliable, store_imputations=self.store_imputations)

    def hyperparameters(self) -> Hyperparameters:
        return Hyperparameters(sigma0_sq=self.sigma0_sq, a0=self.a0, b0=self.b0)

    def sim_spec(self, seed: Optional[int] = None) -> SimSpec:
        return SimSpec(setting=Setting.parse(self.setting), n=self.n, p=self.p, q=self.q,
                       rho_x=self.rho_x, missing_fraction=self.missing_fraction,
                       interactions=self.interactions, family=Family(self.family),
                       n_test=self.n_test, seed=self.seed if seed is None else seed)

    def to_dict(self) -> dict:
        """JSON-ready effective configuration (for the run manifest)."""
        out = {}
        for f in fields(self):
            value = getattr(self, f.name)
            out[f.name] = list(value) if isinstance(value, tuple) else value
        return out


def _coerce(key: str, value: Any) -> Any:
    expected = SCHEMA.get(key, (None, None))[1]
    if value is None or expected is None:
        return value
    try:
        if expected is bool:
            return parse_bool(value)
        if expected is int:
            return int(value)
        if expected is float:
            return float(value)
        if expected is list:
            return tuple(value) if not isinstance(value, str) else (value,)
        return str(value)
    except (TypeError, ValueError):
        raise ConfigError(f"invalid value for {key}: {value!r}") from None


def build_run_config(command: str, flags: Optional[Dict[str, Any]] = None,
                     file_values: Optional[Dict[str, Any]] = None) -> RunConfig:
    """
    Merge defaults, config-file values and flags into a validated RunConfig.

    Flags whose value is None were not given on the command line and do not
    override the file.

    Raises:
        ConfigError: unknown keys or invalid merged configuration
    """
    merged: Dict[str, Any] = {}
    for source in (file_values or {}, flags or {}):
        for key, value in source.items():
            if value is None:
                continue
            merged[key] = value

    known = {f.name for f in fields(RunConfig)} - {'command'}
    unknown = set(merged) - known
    if unknown:
        raise ConfigError(f"unknown configuration keys: {', '.join(sorted(unknown))}")

    kwargs = {key: _coerce(key, value) for key, value in merged.items()}
    if 'setting' in kwargs:
        kwargs['setting'] = Setting.parse(kwargs['setting']).value
    if 'cases' in kwargs:
        kwargs['cases'] = tuple(kwargs['cases'])
    run = RunConfig(command=command, **kwargs)
    logger.debug(f"Effective configuration: {run.to_dict()}")
    return run.validate()
