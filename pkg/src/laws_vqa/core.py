"""Dense statevector simulation: states, gates, and gate application.

Qubit ordering is big-endian throughout: qubit 0 is the leftmost label in a
ket string and the highest-order bit of the amplitude index, so |1100> on
four qubits sits at index 12.  After ``amplitudes.reshape([2] * n)`` qubit q
is tensor axis q.

Rotation gates follow the convention RP(theta) = exp(-i * theta * P / 2).
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import cos, sin

import numpy as np

from .errors import ConfigError, UsageError

MAX_QUBITS = 20

ROTATION_KINDS = ("RX", "RY", "RZ")
FIXED_KINDS = ("X", "H", "CNOT", "U")

_SQRT2_INV = 1.0 / np.sqrt(2.0)

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) * _SQRT2_INV

ROTATION_GENERATORS = {"RX": PAULI_X, "RY": PAULI_Y, "RZ": PAULI_Z}


@dataclass(frozen=True)
class StateVector:
    """Normalized complex amplitudes over the 2**n_qubits computational basis."""

    n_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.shape != (2 ** self.n_qubits,):
            raise UsageError(
                f"amplitude vector has length {amps.shape}, expected 2**{self.n_qubits}"
            )
        object.__setattr__(self, "amplitudes", amps)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))


@dataclass(frozen=True, eq=False)
class Gate:
    """One circuit element.

    ``kind`` is RX/RY/RZ (parameterized, one slot into the parameter vector),
    or X/H/CNOT/U (fixed).  Kind U carries an explicit unitary ``matrix`` on
    its targets and is how fixed-angle rotations and other one-off unitaries
    enter a circuit.
    """

    kind: str
    targets: tuple[int, ...]
    parameter_slot: int | None = None
    matrix: np.ndarray | None = None

    def __post_init__(self):
        object.__setattr__(self, "targets", tuple(int(t) for t in self.targets))
        if self.kind not in ROTATION_KINDS + FIXED_KINDS:
            raise UsageError(f"unknown gate kind {self.kind!r}")
        if len(set(self.targets)) != len(self.targets):
            raise UsageError(f"{self.kind} targets {self.targets} are not distinct")
        if self.kind in ROTATION_KINDS:
            if self.parameter_slot is None:
                raise UsageError(f"{self.kind} gate requires a parameter_slot")
            if len(self.targets) != 1:
                raise UsageError(f"{self.kind} acts on exactly one qubit")
        elif self.parameter_slot is not None:
            raise UsageError(f"fixed gate {self.kind} cannot carry a parameter_slot")
        if self.kind == "U":
            if self.matrix is None:
                raise UsageError("kind 'U' requires an explicit matrix")
            mat = np.asarray(self.matrix, dtype=complex)
            dim = 2 ** len(self.targets)
            if mat.shape != (dim, dim):
                raise UsageError(f"matrix shape {mat.shape} does not fit {len(self.targets)} target(s)")
            if not np.allclose(mat @ mat.conj().T, np.eye(dim), atol=1e-10):
                raise UsageError("kind 'U' matrix is not unitary")
            object.__setattr__(self, "matrix", mat)
        elif self.matrix is not None:
            raise UsageError(f"gate kind {self.kind} does not take a matrix")
        n_targets = {"X": 1, "H": 1, "CNOT": 2}
        if self.kind in n_targets and len(self.targets) != n_targets[self.kind]:
            raise UsageError(f"{self.kind} takes {n_targets[self.kind]} target(s), got {len(self.targets)}")

    @property
    def is_parameterized(self) -> bool:
        return self.kind in ROTATION_KINDS


def rotation_matrix(kind: str, theta: float) -> np.ndarray:
    """2x2 matrix of exp(-i * theta * P / 2) for P in {X, Y, Z}."""
    c, s = cos(theta / 2.0), sin(theta / 2.0)
    mat = np.empty((2, 2), dtype=complex)
    if kind == "RX":
        mat[0, 0] = c
        mat[0, 1] = -1j * s
        mat[1, 0] = -1j * s
        mat[1, 1] = c
    elif kind == "RY":
        mat[0, 0] = c
        mat[0, 1] = -s
        mat[1, 0] = s
        mat[1, 1] = c
    elif kind == "RZ":
        mat[0, 0] = complex(c, -s)
        mat[0, 1] = 0.0
        mat[1, 0] = 0.0
        mat[1, 1] = complex(c, s)
    else:
        raise UsageError(f"{kind!r} is not a rotation kind")
    return mat


def zero_state(n_qubits: int) -> StateVector:
    """|0...0>: amplitude 1 at index 0."""
    if not 1 <= n_qubits <= MAX_QUBITS:
        raise ConfigError(f"n_qubits must be in [1, {MAX_QUBITS}], got {n_qubits}")
    amps = np.zeros(2 ** n_qubits, dtype=complex)
    amps[0] = 1.0
    return StateVector(n_qubits, amps)


def basis_state(n_qubits: int, bits: str) -> StateVector:
    """Computational basis state from a bit string, qubit 0 leftmost."""
    if len(bits) != n_qubits or set(bits) - {"0", "1"}:
        raise UsageError(f"bit string {bits!r} does not describe {n_qubits} qubits")
    amps = np.zeros(2 ** n_qubits, dtype=complex)
    amps[int(bits, 2)] = 1.0
    return StateVector(n_qubits, amps)


def _apply_single_qubit(amps: np.ndarray, mat: np.ndarray, qubit: int, n: int) -> np.ndarray:
    view = amps.reshape(2 ** qubit, 2, -1)
    out = np.empty_like(view)
    out[:, 0, :] = mat[0, 0] * view[:, 0, :] + mat[0, 1] * view[:, 1, :]
    out[:, 1, :] = mat[1, 0] * view[:, 0, :] + mat[1, 1] * view[:, 1, :]
    return out.reshape(-1)


@lru_cache(maxsize=256)
def _cnot_permutation(control: int, target: int, n: int) -> np.ndarray:
    """CNOT is a basis permutation; cache the gather indices."""
    indices = np.arange(2 ** n)
    control_bit = 1 << (n - 1 - control)
    target_bit = 1 << (n - 1 - target)
    flipped = np.where(indices & control_bit, indices ^ target_bit, indices)
    return flipped


def _apply_cnot(amps: np.ndarray, control: int, target: int, n: int) -> np.ndarray:
    return amps[_cnot_permutation(control, target, n)]


def _apply_dense(amps: np.ndarray, mat: np.ndarray, targets: tuple[int, ...], n: int) -> np.ndarray:
    k = len(targets)
    tensor = amps.reshape([2] * n)
    moved = np.moveaxis(tensor, targets, range(k))
    flat = moved.reshape(2 ** k, -1)
    flat = mat @ flat
    moved = flat.reshape([2] * n)
    return np.moveaxis(moved, range(k), targets).reshape(-1)


def apply_gate_amplitudes(amps: np.ndarray, gate: Gate, theta: float | None, n: int) -> np.ndarray:
    """Raw-array gate application; the validated fast path under apply_gate."""
    if gate.kind in ROTATION_KINDS:
        return _apply_single_qubit(amps, rotation_matrix(gate.kind, float(theta)), gate.targets[0], n)
    if gate.kind == "CNOT":
        return _apply_cnot(amps, gate.targets[0], gate.targets[1], n)
    if gate.kind == "X":
        return _apply_single_qubit(amps, PAULI_X, gate.targets[0], n)
    if gate.kind == "H":
        return _apply_single_qubit(amps, HADAMARD, gate.targets[0], n)
    return _apply_dense(amps, gate.matrix, gate.targets, n)


def apply_gate(state: StateVector, gate: Gate, theta: float | None = None) -> StateVector:
    """Apply one gate; returns a new StateVector, norm preserved.

    ``theta`` must be supplied iff the gate is parameterized.
    """
    if gate.is_parameterized and theta is None:
        raise UsageError(f"{gate.kind} gate needs a rotation angle")
    if not gate.is_parameterized and theta is not None:
        raise UsageError(f"fixed gate {gate.kind} takes no angle")
    n = state.n_qubits
    if any(t >= n for t in gate.targets):
        raise UsageError(f"gate targets {gate.targets} exceed {n} qubits")
    return StateVector(n, apply_gate_amplitudes(state.amplitudes, gate, theta, n))


def apply_pauli(amps: np.ndarray, qubit: int, pauli: str, n: int) -> np.ndarray:
    """Apply a single-qubit Pauli in place-free fashion; cheaper than a dense 2x2."""
    view = amps.reshape(2 ** qubit, 2, -1)
    out = np.empty_like(view)
    if pauli == "X":
        out[:, 0, :] = view[:, 1, :]
        out[:, 1, :] = view[:, 0, :]
    elif pauli == "Y":
        out[:, 0, :] = -1j * view[:, 1, :]
        out[:, 1, :] = 1j * view[:, 0, :]
    elif pauli == "Z":
        out[:, 0, :] = view[:, 0, :]
        out[:, 1, :] = -view[:, 1, :]
    else:
        raise UsageError(f"unknown Pauli {pauli!r}")
    return out.reshape(-1)


def gate_unitary(gate: Gate, theta: float | None, n_qubits: int) -> np.ndarray:
    """Full 2**n x 2**n matrix of one gate. Oracle-grade, not for hot paths."""
    dim = 2 ** n_qubits
    mat = np.eye(dim, dtype=complex)
    for col in range(dim):
        basis = np.zeros(dim, dtype=complex)
        basis[col] = 1.0
        mat[:, col] = apply_gate(StateVector(n_qubits, basis), gate, theta).amplitudes
    return mat
