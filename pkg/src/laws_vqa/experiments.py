"""Seeded, reproducible experiment pipelines.

Every run is a pure function of (config, seed): the seed feeds a single
numpy Generator that draws the initial parameters first and any mini-batches
afterwards, so reruns are bit-identical (wall_ms aside) and all optimizers
share theta_0 for a given seed.
"""
from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import asdict, dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__
from .circuits import (
    CostFunction,
    ParameterizedCircuit,
    build_h2_ansatz,
    build_hardware_efficient,
    build_random_pqc,
    cost,
)
from .classifier import ClassifierModel, Sample
from .differentiation import (
    BpScanRow,
    bp_variance_scan,
    fubini_study_metric,
    parameter_shift_gradient,
)
from .errors import ConfigError, IngestionError, NumericError
from .hamiltonian import PauliString, PauliSumHamiltonian, exact_ground_energy, load_hamiltonian
from .optimizers import (
    Objective,
    OptimizerConfig,
    TraceRecord,
    init_state,
    make_step_driver,
)

H2_REFERENCE_ENERGY = -1.1361894
H2_ENERGY_GATE = 5e-4

DEFAULT_RANDOM_PQC_SEED = 6       # fixed reference circuit; theta_0 varies with the run seed
DEFAULT_BP_QUBITS = (2, 4, 6, 8)
DEFAULT_BP_SAMPLES = 200
DEFAULT_BP_DEPTH_FACTOR = 5       # layers = depth_factor * n_qubits

IRIS_PADDING = (0.3, 0.0)


def _data_path(name: str) -> Path:
    return Path(str(resources.files("laws_vqa") / "data" / name))


@dataclass(frozen=True)
class Dataset:
    """Samples with a fixed train/validation split."""

    samples: tuple[Sample, ...]
    train_indices: tuple[int, ...]
    val_indices: tuple[int, ...]

    def __post_init__(self):
        overlap = set(self.train_indices) & set(self.val_indices)
        covered = set(self.train_indices) | set(self.val_indices)
        if overlap or covered != set(range(len(self.samples))):
            raise ConfigError("train/validation split must be disjoint and covering")

    @property
    def train(self) -> list[Sample]:
        return [self.samples[i] for i in self.train_indices]

    @property
    def val(self) -> list[Sample]:
        return [self.samples[i] for i in self.val_indices]


def load_iris(path: str | Path | None = None, seed: int = 0, train_fraction: float = 0.75) -> Dataset:
    """Load a two-class CSV (f1..f4,label), keep the first two features,
    min-max scale them to [0, 1], pad with (0.3, 0.0), L2-normalize for
    amplitude encoding, shuffle, split.

    The scaling step matters: in raw units the normalized class directions
    are nearly collinear and the readout cannot open a usable margin.
    """
    if not 0.0 < train_fraction < 1.0:
        raise ConfigError(f"train_fraction must be in (0, 1), got {train_fraction}")
    source = Path(path) if path is not None else _data_path("iris.csv")
    if not source.exists():
        raise ConfigError(f"dataset file not found: {source}")
    raw: list[tuple[np.ndarray, float]] = []
    with source.open(newline="", encoding="utf-8") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or (lineno == 1 and not _is_float(row[0])):
                continue  # blank line or header
            if len(row) != 5:
                raise IngestionError(f"line {lineno}: expected 5 columns, got {len(row)}")
            try:
                values = [float(v) for v in row]
            except ValueError:
                raise IngestionError(f"line {lineno}: non-numeric field in {row}") from None
            raw.append((np.array(values[:4]), values[4]))
    if not raw:
        raise IngestionError("dataset is empty")
    labels = sorted({y for _, y in raw})
    if len(labels) != 2:
        raise IngestionError(f"expected exactly two classes, found {labels}")
    label_map = {labels[0]: -1, labels[1]: +1}
    if set(labels) == {-1.0, 1.0}:
        label_map = {-1.0: -1, 1.0: +1}

    kept = np.array([features[:2] for features, _ in raw])
    lo, hi = kept.min(axis=0), kept.max(axis=0)
    span = np.where(hi > lo, hi - lo, 1.0)
    samples = []
    for features, y in raw:
        scaled = (features[:2] - lo) / span
        padded = np.concatenate([scaled, IRIS_PADDING])
        samples.append((padded / np.linalg.norm(padded), label_map[y]))

    rng = np.random.default_rng(seed)
    order = rng.permutation(len(samples))
    n_train = int(train_fraction * len(samples))
    return Dataset(
        samples=tuple(samples),
        train_indices=tuple(int(i) for i in order[:n_train]),
        val_indices=tuple(int(i) for i in order[n_train:]),
    )


def _is_float(token: str) -> bool:
    try:
        float(token)
        return True
    except ValueError:
        return False


@dataclass(frozen=True)
class ExperimentResult:
    trace: tuple[TraceRecord, ...]
    final_theta: np.ndarray
    metadata: dict
    aborted: bool = False


def _provenance(experiment: str, optimizer: str, seed: int, config: OptimizerConfig) -> str:
    digest = hashlib.sha256(json.dumps(asdict(config), sort_keys=True).encode()).hexdigest()[:12]
    return f"laws-vqa/{__version__} {experiment}:{optimizer} seed={seed} cfg={digest}"


def _run_loop(
    objective: Objective,
    optimizer_name: str,
    config: OptimizerConfig,
    theta0: np.ndarray,
    iterations: int,
    metadata: dict,
) -> ExperimentResult:
    if iterations < 0:
        raise ConfigError("iterations must be >= 0")
    driver = make_step_driver(optimizer_name, config)
    state = init_state(theta0)
    extras = objective.extra_metrics(theta0) if objective.extra_metrics else {}
    trace = [TraceRecord(0, float(objective.cost(theta0)), 0.0, 0.0, extras)]
    aborted = False
    for _ in range(iterations):
        try:
            state, record = driver(state, objective)
        except NumericError as exc:
            metadata = {**metadata, "abort_reason": str(exc)}
            aborted = True
            break
        trace.append(record)
    return ExperimentResult(
        trace=tuple(trace),
        final_theta=state.theta.copy(),
        metadata={**metadata, "aborted": aborted},
        aborted=aborted,
    )


def _analytic_objective(cf: CostFunction, config: OptimizerConfig) -> Objective:
    return Objective(
        n_params=cf.n_params,
        cost=lambda theta: cost(cf, theta),
        gradient=lambda theta: parameter_shift_gradient(cf, theta),
        metric=lambda theta: fubini_study_metric(cf.circuit, theta, cf.input_state, damping=config.delta),
    )


def _base_metadata(experiment, optimizer_name, seed, iterations, config, **extra) -> dict:
    meta = {
        "experiment": experiment,
        "optimizer": optimizer_name,
        "seed": int(seed),
        "iterations": int(iterations),
        "config": asdict(config),
        "provenance": _provenance(experiment, optimizer_name, seed, config),
    }
    meta.update(extra)
    return meta


def chain_zz_observable(n_qubits: int) -> PauliSumHamiltonian:
    """Sum of nearest-neighbour ZZ couplings (Z0 Z1 + Z1 Z2 on three qubits)."""
    terms = tuple(
        PauliString(1.0, {q: "Z", q + 1: "Z"}) for q in range(n_qubits - 1)
    )
    return PauliSumHamiltonian(n_qubits, terms)


def run_random_pqc(
    optimizer_name: str,
    config: OptimizerConfig,
    seed: int,
    iterations: int = 400,
    circuit_seed: int = DEFAULT_RANDOM_PQC_SEED,
    circuit: ParameterizedCircuit | None = None,
) -> ExperimentResult:
    """Minimize the chain-ZZ energy of a seeded 3-qubit, 4-parameter random
    circuit; theta_0 is uniform in [0, 2pi) from the run seed."""
    circuit = circuit if circuit is not None else build_random_pqc(3, 4, circuit_seed)
    observable = chain_zz_observable(circuit.n_qubits)
    cf = CostFunction(circuit, observable)
    rng = np.random.default_rng(seed)
    theta0 = rng.uniform(0.0, 2.0 * np.pi, size=cf.n_params)
    metadata = _base_metadata(
        "random-pqc", optimizer_name, seed, iterations, config, circuit_seed=circuit_seed
    )
    return _run_loop(_analytic_objective(cf, config), optimizer_name, config, theta0, iterations, metadata)


def load_h2_hamiltonian(path: str | Path | None = None) -> PauliSumHamiltonian:
    """Shipped (or user-supplied) H2 Hamiltonian; rejected unless its exact
    ground energy matches the reference value within 5e-4 Ha."""
    source = Path(path) if path is not None else _data_path("h2_sto3g.txt")
    if not source.exists():
        raise ConfigError(f"Hamiltonian file not found: {source}")
    hamiltonian = load_hamiltonian(source)
    ground = exact_ground_energy(hamiltonian)
    if abs(ground - H2_REFERENCE_ENERGY) > H2_ENERGY_GATE:
        raise ConfigError(
            f"H2 Hamiltonian fails the ground-energy gate: {ground:.7f} vs "
            f"{H2_REFERENCE_ENERGY} (tolerance {H2_ENERGY_GATE})"
        )
    return hamiltonian


def run_h2_vqe(
    optimizer_name: str,
    config: OptimizerConfig,
    seed: int,
    iterations: int = 400,
    hamiltonian_path: str | Path | None = None,
    include_singles: bool = False,
) -> ExperimentResult:
    """Minimize <H2> from the Hartree-Fock state |1100> (theta = 0).

    The cost is data-free, so the gradient source is the exact analytic
    gradient and the trace is seed-independent.
    """
    hamiltonian = load_h2_hamiltonian(hamiltonian_path)
    circuit = build_h2_ansatz(include_singles)
    cf = CostFunction(circuit, hamiltonian)
    theta0 = np.zeros(cf.n_params)
    metadata = _base_metadata(
        "h2-vqe", optimizer_name, seed, iterations, config,
        ground_energy=exact_ground_energy(hamiltonian),
    )
    return _run_loop(_analytic_objective(cf, config), optimizer_name, config, theta0, iterations, metadata)


def run_iris_classifier(
    optimizer_name: str,
    config: OptimizerConfig,
    seed: int,
    iterations: int = 50,
    data_path: str | Path | None = None,
    train_fraction: float = 0.75,
    batch_size: int = 5,
    n_layers: int = 6,
) -> ExperimentResult:
    """Train the two-qubit amplitude-encoded classifier with square loss.

    Mini-batches of ``batch_size`` are drawn uniformly with replacement from
    the training split; the trace logs full-train cost plus train/validation
    accuracy each iteration.
    """
    if batch_size < 1:
        raise ConfigError("batch_size must be >= 1")
    dataset = load_iris(data_path, seed, train_fraction)
    train, val = dataset.train, dataset.val
    circuit = build_hardware_efficient(2, n_layers, ("RY", "RZ"), "chain")
    model = ClassifierModel(circuit)

    rng = np.random.default_rng(seed)
    theta0 = np.concatenate([0.01 * rng.standard_normal(circuit.n_params), [0.0]])

    def draw_batch() -> list[Sample]:
        idx = rng.integers(0, len(train), size=batch_size)
        return [train[i] for i in idx]

    objective = Objective(
        n_params=model.n_params,
        cost=lambda theta: model.batch_cost(theta, train),
        gradient=lambda theta: np.mean([model.sample_gradient(theta, s) for s in draw_batch()], axis=0),
        metric=lambda theta: model.metric(theta, draw_batch(), damping=config.delta),
        extra_metrics=lambda theta: {
            "acc_train": model.accuracy(theta, train),
            "acc_val": model.accuracy(theta, val),
        },
    )
    metadata = _base_metadata(
        "iris", optimizer_name, seed, iterations, config,
        batch_size=batch_size, train_fraction=train_fraction, n_layers=n_layers,
        n_train=len(train), n_val=len(val),
    )
    return _run_loop(objective, optimizer_name, config, theta0, iterations, metadata)


def run_bp_scan(
    seed: int,
    qubit_range=DEFAULT_BP_QUBITS,
    n_samples: int = DEFAULT_BP_SAMPLES,
    depth_factor: int = DEFAULT_BP_DEPTH_FACTOR,
) -> list[BpScanRow]:
    """Gradient-variance scan over deep random circuits (depth_factor * n
    layers of one rotation per qubit plus a CNOT ring)."""
    if depth_factor < 1:
        raise ConfigError("depth_factor must be >= 1")
    family = lambda n, rng: build_random_pqc(n, depth_factor * n * n, rng)
    return bp_variance_scan(family, list(qubit_range), n_samples, seed)


EXPERIMENT_NAMES = ("random-pqc", "h2-vqe", "iris", "bp-scan")
