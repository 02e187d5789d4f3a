"""Two-qubit variational classifier with amplitude encoding.

The model score is <Z_0> + bias on the state U(theta)|x>, prediction is its
sign, and training minimizes the square loss against labels in {-1, +1}.
The optimization vector stacks the circuit parameters with the bias as the
last coordinate; the bias row of the metric is the identity since it is a
classical parameter.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .circuits import ParameterizedCircuit, evaluate_amplitudes
from .core import StateVector
from .differentiation import (
    DEFAULT_DAMPING,
    MetricTensor,
    SHIFT,
    fubini_study_metric,
)
from .errors import UsageError

Sample = tuple[np.ndarray, int]


def amplitude_encode(features: np.ndarray, n_qubits: int) -> StateVector:
    """Unit-normalized features become the amplitudes of an n-qubit state."""
    vec = np.asarray(features, dtype=float)
    if vec.size != 2 ** n_qubits:
        raise UsageError(f"need {2 ** n_qubits} features for {n_qubits} qubits, got {vec.size}")
    norm = np.linalg.norm(vec)
    if norm < 1e-12:
        raise UsageError("cannot amplitude-encode a zero vector")
    return StateVector(n_qubits, vec.astype(complex) / norm)


@dataclass(frozen=True, eq=False)
class ClassifierModel:
    """Circuit plus readout; parameters are (circuit params..., bias)."""

    circuit: ParameterizedCircuit

    def __post_init__(self):
        object.__setattr__(self, "_half", 2 ** (self.circuit.n_qubits - 1))

    @property
    def n_params(self) -> int:
        return self.circuit.n_params + 1

    def split(self, theta_full: np.ndarray) -> tuple[np.ndarray, float]:
        theta_full = np.asarray(theta_full, dtype=float)
        if theta_full.size != self.n_params:
            raise UsageError(f"expected {self.n_params} parameters (incl. bias), got {theta_full.size}")
        return theta_full[:-1], float(theta_full[-1])

    def encode(self, features: np.ndarray) -> StateVector:
        return amplitude_encode(features, self.circuit.n_qubits)

    def _readout_value(self, theta: np.ndarray, state: StateVector) -> float:
        # <Z_0>: qubit 0 is the high-order index bit, so +|a|^2 on the first
        # half of the amplitudes and -|a|^2 on the second
        amps = evaluate_amplitudes(self.circuit, theta, state.amplitudes)
        probs = amps.real ** 2 + amps.imag ** 2
        return float(probs[: self._half].sum() - probs[self._half :].sum())

    def score(self, theta_full: np.ndarray, features: np.ndarray) -> float:
        theta, bias = self.split(theta_full)
        return self._readout_value(theta, self.encode(features)) + bias

    def predict(self, theta_full: np.ndarray, features: np.ndarray) -> int:
        return 1 if self.score(theta_full, features) >= 0.0 else -1

    def sample_loss(self, theta_full: np.ndarray, sample: Sample) -> float:
        features, label = sample
        return (self.score(theta_full, features) - label) ** 2

    def sample_gradient(self, theta_full: np.ndarray, sample: Sample) -> np.ndarray:
        """Gradient of the square loss for one sample: parameter-shift on the
        circuit parameters, analytic for the bias."""
        features, label = sample
        theta, bias = self.split(theta_full)
        state = self.encode(features)
        residual = 2.0 * (self._readout_value(theta, state) + bias - label)
        grad = np.empty(self.n_params)
        for k in range(theta.size):
            shifted = theta.copy()
            shifted[k] = theta[k] + SHIFT
            plus = self._readout_value(shifted, state)
            shifted[k] = theta[k] - SHIFT
            minus = self._readout_value(shifted, state)
            grad[k] = residual * 0.5 * (plus - minus)
        grad[-1] = residual
        return grad

    def batch_cost(self, theta_full: np.ndarray, samples: list[Sample]) -> float:
        if not samples:
            raise UsageError("cost needs at least one sample")
        return float(np.mean([self.sample_loss(theta_full, s) for s in samples]))

    def accuracy(self, theta_full: np.ndarray, samples: list[Sample]) -> float:
        if not samples:
            raise UsageError("accuracy needs at least one sample")
        hits = sum(self.predict(theta_full, x) == y for x, y in samples)
        return hits / len(samples)

    def metric(
        self,
        theta_full: np.ndarray,
        samples: list[Sample],
        damping: float = DEFAULT_DAMPING,
    ) -> MetricTensor:
        """Batch-mean Fubini-Study metric of the circuit block, extended with a
        unit diagonal entry for the bias."""
        if not samples:
            raise UsageError("metric needs at least one sample")
        theta, _ = self.split(theta_full)
        block = np.zeros((theta.size, theta.size))
        for features, _label in samples:
            block += fubini_study_metric(self.circuit, theta, self.encode(features)).matrix
        block /= len(samples)
        full = np.zeros((self.n_params, self.n_params))
        full[:-1, :-1] = block
        full[-1, -1] = 1.0
        return MetricTensor(full, damping)
