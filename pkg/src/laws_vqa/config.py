"""Run configuration: sectioned key-value files plus flag overrides.

Config files are a TOML-compatible subset with three sections::

    [experiment]
    name = "h2-vqe"
    seed = 1
    iterations = 400

    [optimizer]
    name = "laws"
    eta = 0.01
    mu = 0.5
    warm_start_steps = 5

    [output]
    directory = "runs"
    plots = true

Flags override file values, file values override defaults.  Unknown keys are
rejected by name, and any referenced files must exist before a run starts.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib

from .errors import ConfigError
from .experiments import (
    DEFAULT_BP_DEPTH_FACTOR,
    DEFAULT_BP_QUBITS,
    DEFAULT_BP_SAMPLES,
    DEFAULT_RANDOM_PQC_SEED,
    EXPERIMENT_NAMES,
)
from .optimizers import OPTIMIZER_NAMES, OptimizerConfig

DEFAULT_ITERATIONS = {"random-pqc": 400, "h2-vqe": 400, "iris": 50, "bp-scan": 0}


def _int_list(value) -> tuple[int, ...]:
    if isinstance(value, str):
        parts = [p for p in value.replace(" ", "").split(",") if p]
        return tuple(int(p) for p in parts)
    if isinstance(value, (list, tuple)):
        return tuple(int(v) for v in value)
    raise TypeError


_EXPERIMENT_KEYS = {
    "name": str,
    "seed": int,
    "iterations": int,
    "circuit_seed": int,
    "circuit_file": str,
    "hamiltonian_file": str,
    "include_singles": bool,
    "iris_file": str,
    "train_fraction": float,
    "batch_size": int,
    "n_layers": int,
    "qubits": _int_list,
    "samples": int,
    "depth_factor": int,
    "threshold": float,
}
_OPTIMIZER_KEYS = {
    "name": str,
    "eta": float,
    "mu": float,
    "warm_start_steps": int,
    "alpha": float,
    "beta1": float,
    "beta2": float,
    "beta": float,
    "epsilon": float,
    "delta": float,
    "cutoff": float,
    "c0": float,
    "schedule": str,
    "warm_start_strategy": str,
    "delta_variant": str,
    "inner_optimizer": str,
    "lambda_mode": str,
}
_OUTPUT_KEYS = {"directory": str, "plots": bool}

_SECTIONS = {"experiment": _EXPERIMENT_KEYS, "optimizer": _OPTIMIZER_KEYS, "output": _OUTPUT_KEYS}

# flat override name -> (section, key)
FLAG_MAP = {"experiment": ("experiment", "name"), "optimizer": ("optimizer", "name"),
            "output_dir": ("output", "directory"), "plots": ("output", "plots")}
for _key in _EXPERIMENT_KEYS:
    if _key != "name":
        FLAG_MAP.setdefault(_key, ("experiment", _key))
for _key in _OPTIMIZER_KEYS:
    if _key != "name":
        FLAG_MAP.setdefault(_key, ("optimizer", _key))


@dataclass(frozen=True)
class RunConfig:
    """Fully resolved settings for one invocation."""

    experiment: str = "random-pqc"
    optimizer: str = "laws"
    optimizer_config: OptimizerConfig = OptimizerConfig()
    seed: int = 0
    iterations: int | None = None
    output_dir: str = "runs"
    plots: bool = True
    circuit_seed: int = DEFAULT_RANDOM_PQC_SEED
    circuit_file: str | None = None
    hamiltonian_file: str | None = None
    include_singles: bool = False
    iris_file: str | None = None
    train_fraction: float = 0.75
    batch_size: int = 5
    n_layers: int = 6
    qubits: tuple[int, ...] = DEFAULT_BP_QUBITS
    samples: int = DEFAULT_BP_SAMPLES
    depth_factor: int = DEFAULT_BP_DEPTH_FACTOR
    threshold: float | None = None

    @property
    def resolved_iterations(self) -> int:
        if self.iterations is not None:
            return self.iterations
        return DEFAULT_ITERATIONS[self.experiment]

    def snapshot(self) -> dict:
        payload = dataclasses.asdict(self)
        payload["optimizer_config"] = dataclasses.asdict(self.optimizer_config)
        payload["qubits"] = list(self.qubits)
        return payload


def _coerce(section: str, key: str, value):
    caster = _SECTIONS[section][key]
    try:
        if caster is bool:
            if isinstance(value, bool):
                return value
            if isinstance(value, str) and value.lower() in ("true", "false"):
                return value.lower() == "true"
            raise TypeError
        if caster is int and isinstance(value, bool):
            raise TypeError
        if caster is int and isinstance(value, float) and not value.is_integer():
            raise TypeError
        return caster(value)
    except (TypeError, ValueError):
        raise ConfigError(
            f"key '{section}.{key}' has invalid value {value!r} (expected {getattr(caster, '__name__', 'value')})"
        ) from None


def _read_config_file(path: str | Path) -> dict[str, dict]:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        data = tomllib.loads(path.read_text(encoding="utf-8"))
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config file {path}: {exc}") from None
    for section in data:
        if section not in _SECTIONS:
            raise ConfigError(f"unknown config section '{section}' (expected experiment/optimizer/output)")
        if not isinstance(data[section], dict):
            raise ConfigError(f"section '{section}' must be a table of keys")
        for key in data[section]:
            if key not in _SECTIONS[section]:
                raise ConfigError(f"unknown key '{section}.{key}'")
    return data


def parse_config(file_path: str | Path | None = None, overrides: dict | None = None) -> RunConfig:
    """Resolve defaults <- file <- flag overrides into a validated RunConfig."""
    merged: dict[tuple[str, str], object] = {}
    if file_path is not None:
        for section, table in _read_config_file(file_path).items():
            for key, value in table.items():
                merged[(section, key)] = _coerce(section, key, value)
    for flat, value in (overrides or {}).items():
        if value is None:
            continue
        if flat not in FLAG_MAP:
            raise ConfigError(f"unknown option '{flat}'")
        section, key = FLAG_MAP[flat]
        merged[(section, key)] = _coerce(section, key, value)

    def pick(section, key, default):
        return merged.get((section, key), default)

    defaults = RunConfig()
    optimizer_kwargs = {
        key: pick("optimizer", key, getattr(OptimizerConfig(), key))
        for key in _OPTIMIZER_KEYS
        if key != "name"
    }
    try:
        optimizer_config = OptimizerConfig(**optimizer_kwargs)
    except ConfigError as exc:
        raise ConfigError(f"optimizer settings invalid: {exc}") from None

    config = RunConfig(
        experiment=pick("experiment", "name", defaults.experiment),
        optimizer=pick("optimizer", "name", defaults.optimizer),
        optimizer_config=optimizer_config,
        seed=pick("experiment", "seed", defaults.seed),
        iterations=pick("experiment", "iterations", None),
        output_dir=pick("output", "directory", defaults.output_dir),
        plots=pick("output", "plots", defaults.plots),
        circuit_seed=pick("experiment", "circuit_seed", defaults.circuit_seed),
        circuit_file=pick("experiment", "circuit_file", None),
        hamiltonian_file=pick("experiment", "hamiltonian_file", None),
        include_singles=pick("experiment", "include_singles", defaults.include_singles),
        iris_file=pick("experiment", "iris_file", None),
        train_fraction=pick("experiment", "train_fraction", defaults.train_fraction),
        batch_size=pick("experiment", "batch_size", defaults.batch_size),
        n_layers=pick("experiment", "n_layers", defaults.n_layers),
        qubits=pick("experiment", "qubits", defaults.qubits),
        samples=pick("experiment", "samples", defaults.samples),
        depth_factor=pick("experiment", "depth_factor", defaults.depth_factor),
        threshold=pick("experiment", "threshold", None),
    )
    validate_config(config)
    return config


def validate_config(config: RunConfig) -> None:
    if config.experiment not in EXPERIMENT_NAMES:
        raise ConfigError(
            f"key 'experiment.name' value {config.experiment!r} is not one of {', '.join(EXPERIMENT_NAMES)}"
        )
    if config.optimizer not in OPTIMIZER_NAMES:
        raise ConfigError(
            f"key 'optimizer.name' value {config.optimizer!r} is not a registered optimizer; "
            f"registered: {', '.join(OPTIMIZER_NAMES)}"
        )
    if config.iterations is not None and config.iterations < 0:
        raise ConfigError("key 'experiment.iterations' must be >= 0")
    if config.seed < 0:
        raise ConfigError("key 'experiment.seed' must be >= 0")
    for key in ("circuit_file", "hamiltonian_file", "iris_file"):
        value = getattr(config, key)
        if value is not None and not Path(value).exists():
            raise ConfigError(f"key 'experiment.{key}' file not found: {value}")
