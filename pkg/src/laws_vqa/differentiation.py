"""Analytic gradients, the quantum geometric tensor, and the gradient-variance probe.

Parameter-shift gradients are exact for the supported gate set (all
parameterized gates are Pauli rotations with shift pi/2).  Statevector
derivatives for the geometric tensor are computed by generator injection:
d/dtheta exp(-i theta V/2) inserts a factor (-i V / 2), which is one extra
Pauli application on a cached intermediate state.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .circuits import CostFunction, ParameterizedCircuit, as_parameter_vector, cost
from .core import StateVector, apply_gate_amplitudes, apply_pauli, zero_state
from .errors import CapabilityError, UsageError
from .hamiltonian import PauliString, PauliSumHamiltonian

SHIFT = np.pi / 2.0
DEFAULT_DAMPING = 1e-6
DEFAULT_CUTOFF = 1e-9

_ROTATION_AXIS = {"RX": "X", "RY": "Y", "RZ": "Z"}


def _require_single_use_slots(circuit: ParameterizedCircuit) -> None:
    slots = [g.parameter_slot for g in circuit.gates if g.is_parameterized]
    if len(slots) != len(set(slots)):
        raise CapabilityError(
            "the two-point shift rule needs each parameter slot on exactly one gate; "
            "use finite_difference_gradient for shared slots"
        )


def parameter_shift_gradient(cf: CostFunction, theta) -> np.ndarray:
    """Exact gradient: entry k is [C(theta + pi/2 e_k) - C(theta - pi/2 e_k)] / 2."""
    _require_single_use_slots(cf.circuit)
    theta = as_parameter_vector(theta, cf.n_params)
    grad = np.empty(cf.n_params)
    for k in range(cf.n_params):
        shifted = theta.copy()
        shifted[k] = theta[k] + SHIFT
        plus = cost(cf, shifted)
        shifted[k] = theta[k] - SHIFT
        minus = cost(cf, shifted)
        grad[k] = 0.5 * (plus - minus)
    return grad


def finite_difference_gradient(cf: CostFunction, theta, h: float = 1e-5) -> np.ndarray:
    """Central differences; the testing oracle for the shift rule."""
    if h <= 0:
        raise UsageError("finite-difference step h must be positive")
    theta = as_parameter_vector(theta, cf.n_params)
    grad = np.empty(cf.n_params)
    for k in range(cf.n_params):
        shifted = theta.copy()
        shifted[k] = theta[k] + h
        plus = cost(cf, shifted)
        shifted[k] = theta[k] - h
        minus = cost(cf, shifted)
        grad[k] = (plus - minus) / (2.0 * h)
    return grad


def stochastic_gradient(model, theta, batch: Sequence) -> np.ndarray:
    """Mean of per-sample loss gradients over a batch.

    ``model`` must provide ``sample_gradient(theta, sample)``; uniform
    with-replacement batches make this an unbiased full-data estimator.
    """
    if len(batch) == 0:
        raise UsageError("batch must not be empty")
    total = None
    for sample in batch:
        g = model.sample_gradient(theta, sample)
        total = g if total is None else total + g
    return total / len(batch)


def statevector_derivatives(
    circuit: ParameterizedCircuit,
    theta,
    input_state: StateVector | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Return (psi, D) with D[:, k] = d|psi>/d theta_k, exact via generator injection."""
    theta = as_parameter_vector(theta, circuit.n_params)
    state = input_state if input_state is not None else zero_state(circuit.n_qubits)
    if state.n_qubits != circuit.n_qubits:
        raise UsageError("input state and circuit qubit counts differ")
    n = circuit.n_qubits
    cache = [state.amplitudes]
    amps = state.amplitudes
    for gate in circuit.gates:
        angle = theta[gate.parameter_slot] if gate.is_parameterized else None
        amps = apply_gate_amplitudes(amps, gate, angle, n)
        cache.append(amps)
    psi = cache[-1]

    derivs = np.zeros((psi.size, circuit.n_params), dtype=complex)
    for i, gate in enumerate(circuit.gates):
        if not gate.is_parameterized:
            continue
        branch = (-0.5j) * apply_pauli(cache[i + 1], gate.targets[0], _ROTATION_AXIS[gate.kind], n)
        for j in range(i + 1, len(circuit.gates)):
            later = circuit.gates[j]
            angle = theta[later.parameter_slot] if later.is_parameterized else None
            branch = apply_gate_amplitudes(branch, later, angle, n)
        derivs[:, gate.parameter_slot] += branch
    return psi, derivs


@dataclass(frozen=True)
class MetricTensor:
    """Real symmetric P x P metric with its damping for later inversion."""

    matrix: np.ndarray
    damping: float = DEFAULT_DAMPING

    def __post_init__(self):
        mat = np.asarray(self.matrix, dtype=float)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise UsageError(f"metric must be square, got shape {mat.shape}")
        if np.max(np.abs(mat - mat.T), initial=0.0) >= 1e-10:
            raise UsageError("metric is not symmetric")
        if self.damping < 0:
            raise UsageError("damping must be >= 0")
        object.__setattr__(self, "matrix", mat)

    @property
    def n_params(self) -> int:
        return self.matrix.shape[0]


def quantum_geometric_tensor(
    circuit: ParameterizedCircuit,
    theta,
    input_state: StateVector | None = None,
) -> np.ndarray:
    """G_ij = <d_i psi, d_j psi> - <d_i psi, psi><psi, d_j psi>; Hermitian."""
    psi, D = statevector_derivatives(circuit, theta, input_state)
    overlaps = D.conj().T @ psi  # <d_i psi, psi>
    G = D.conj().T @ D - np.outer(overlaps, overlaps.conj())
    return 0.5 * (G + G.conj().T)


def fubini_study_metric(
    circuit: ParameterizedCircuit,
    theta,
    input_state: StateVector | None = None,
    damping: float = DEFAULT_DAMPING,
) -> MetricTensor:
    """F = Re[G], symmetrized."""
    F = np.real(quantum_geometric_tensor(circuit, theta, input_state))
    return MetricTensor(0.5 * (F + F.T), damping)


def damped_pseudo_inverse(
    metric: MetricTensor | np.ndarray,
    delta: float | None = None,
    cutoff: float = DEFAULT_CUTOFF,
) -> np.ndarray:
    """Pseudo-inverse of F + delta*I: eigenvalues above the cutoff are inverted,
    the rest are zeroed."""
    if isinstance(metric, MetricTensor):
        mat = metric.matrix
        if delta is None:
            delta = metric.damping
    else:
        mat = np.asarray(metric, dtype=float)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1] or np.max(np.abs(mat - mat.T), initial=0.0) >= 1e-10:
            raise UsageError("damped_pseudo_inverse needs a symmetric square matrix")
        if delta is None:
            delta = 0.0
    if delta < 0 or cutoff < 0:
        raise UsageError("delta and cutoff must be >= 0")
    evals, evecs = np.linalg.eigh(mat + delta * np.eye(mat.shape[0]))
    inv = np.where(evals > cutoff, 1.0 / np.where(evals > cutoff, evals, 1.0), 0.0)
    return (evecs * inv) @ evecs.T


@dataclass(frozen=True)
class BpScanRow:
    n_qubits: int
    n_samples: int
    grad_mean: float
    grad_variance: float
    stderr: float


def bp_variance_scan(
    circuit_family: Callable[[int, np.random.Generator], ParameterizedCircuit],
    qubit_range: Sequence[int],
    n_samples: int,
    seed: int,
    observable_fn: Callable[[int], PauliSumHamiltonian] | None = None,
    param_index: int = 0,
) -> list[BpScanRow]:
    """Sample mean/variance of one cost-gradient component over random draws.

    For each qubit count, every sample draws its own circuit and uniform
    theta in [0, 2pi)^P from an independent stream seeded by
    (seed, n_qubits, sample), so results are schedule-independent.
    """
    if n_samples < 30:
        raise UsageError("n_samples must be >= 30 for a meaningful variance")
    if observable_fn is None:
        observable_fn = lambda n: PauliSumHamiltonian(n, (PauliString(1.0, {0: "Z"}),))
    rows = []
    for n in qubit_range:
        observable = observable_fn(n)
        grads = np.empty(n_samples)
        for i in range(n_samples):
            rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(n, i)))
            circuit = circuit_family(n, rng)
            theta = rng.uniform(0.0, 2.0 * np.pi, size=circuit.n_params)
            cf = CostFunction(circuit, observable)
            shifted = theta.copy()
            shifted[param_index] = theta[param_index] + SHIFT
            plus = cost(cf, shifted)
            shifted[param_index] = theta[param_index] - SHIFT
            minus = cost(cf, shifted)
            grads[i] = 0.5 * (plus - minus)
        rows.append(
            BpScanRow(
                n_qubits=int(n),
                n_samples=int(n_samples),
                grad_mean=float(np.mean(grads)),
                grad_variance=float(np.var(grads, ddof=1)),
                stderr=float(np.std(grads, ddof=1) / np.sqrt(n_samples)),
            )
        )
    return rows
