"""Parameterized circuits: builders, evaluation, and the cost function.

Parameter vectors are plain float ndarrays of length ``circuit.n_params``
(radians).  Gradient vectors use the same representation.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .core import (
    ROTATION_KINDS,
    Gate,
    StateVector,
    apply_gate_amplitudes,
    gate_unitary,
    rotation_matrix,
    zero_state,
)
from .errors import IngestionError, UsageError
from .hamiltonian import PauliSumHamiltonian, expectation


@dataclass(frozen=True, eq=False)
class ParameterizedCircuit:
    """Ordered gate list over n_qubits with n_params rotation parameters."""

    n_qubits: int
    gates: tuple[Gate, ...]
    n_params: int

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        slots = [g.parameter_slot for g in self.gates if g.is_parameterized]
        if set(slots) != set(range(self.n_params)):
            raise UsageError(
                f"parameter slots {sorted(set(slots))} must be exactly 0..{self.n_params - 1}"
            )
        for g in self.gates:
            if any(t < 0 or t >= self.n_qubits for t in g.targets):
                raise UsageError(f"gate {g.kind} targets {g.targets} invalid for {self.n_qubits} qubits")

    def slot_gate_indices(self, slot: int) -> list[int]:
        return [i for i, g in enumerate(self.gates) if g.parameter_slot == slot]


def as_parameter_vector(theta, n_params: int) -> np.ndarray:
    vec = np.asarray(theta, dtype=float).reshape(-1)
    if vec.shape != (n_params,):
        raise UsageError(f"parameter vector has length {vec.size}, expected {n_params}")
    if not np.all(np.isfinite(vec)):
        raise UsageError("parameter vector contains non-finite entries")
    return vec


def evaluate_amplitudes(circuit: ParameterizedCircuit, theta: np.ndarray, amps: np.ndarray) -> np.ndarray:
    """Raw-array circuit evaluation; callers have already validated shapes."""
    n = circuit.n_qubits
    for gate in circuit.gates:
        angle = theta[gate.parameter_slot] if gate.is_parameterized else None
        amps = apply_gate_amplitudes(amps, gate, angle, n)
    return amps


def evaluate_state(
    circuit: ParameterizedCircuit,
    theta,
    input_state: StateVector | None = None,
) -> StateVector:
    """|psi(theta)> = U(theta) |input>, applying gates in order."""
    theta = as_parameter_vector(theta, circuit.n_params)
    state = input_state if input_state is not None else zero_state(circuit.n_qubits)
    if state.n_qubits != circuit.n_qubits:
        raise UsageError("input state and circuit qubit counts differ")
    return StateVector(circuit.n_qubits, evaluate_amplitudes(circuit, theta, state.amplitudes))


@dataclass(frozen=True, eq=False)
class CostFunction:
    """C(theta) = <psi(theta)| H |psi(theta)> for a circuit/observable pair."""

    circuit: ParameterizedCircuit
    observable: PauliSumHamiltonian
    input_state: StateVector = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        if self.input_state is None:
            object.__setattr__(self, "input_state", zero_state(self.circuit.n_qubits))
        if not (self.circuit.n_qubits == self.observable.n_qubits == self.input_state.n_qubits):
            raise UsageError("circuit, observable and input state disagree on qubit count")

    @property
    def n_params(self) -> int:
        return self.circuit.n_params


def cost(cf: CostFunction, theta) -> float:
    return expectation(evaluate_state(cf.circuit, theta, cf.input_state), cf.observable)


def _entangler(n_qubits: int, style: str) -> list[Gate]:
    style = style.replace("-CNOT", "").replace("-cnot", "").lower()
    if style not in ("ring", "chain"):
        raise UsageError(f"entangler must be ring or chain, got {style!r}")
    if n_qubits < 2:
        return []
    pairs = [(q, q + 1) for q in range(n_qubits - 1)]
    if style == "ring":
        pairs.append((n_qubits - 1, 0))
    return [Gate("CNOT", pair) for pair in pairs]


def build_hardware_efficient(
    n_qubits: int,
    n_layers: int,
    rotation_pattern: list[str] | tuple[str, ...] = ("RY",),
    entangler: str = "chain",
) -> ParameterizedCircuit:
    """Layered ansatz: per layer, one rotation per qubit per pattern entry, then CNOTs."""
    if n_layers < 1:
        raise UsageError("n_layers must be >= 1")
    if not rotation_pattern:
        raise UsageError("rotation_pattern must not be empty")
    for kind in rotation_pattern:
        if kind not in ROTATION_KINDS:
            raise UsageError(f"rotation_pattern entries must be RX/RY/RZ, got {kind!r}")
    gates: list[Gate] = []
    slot = 0
    for _ in range(n_layers):
        for kind in rotation_pattern:
            for q in range(n_qubits):
                gates.append(Gate(kind, (q,), parameter_slot=slot))
                slot += 1
        gates.extend(_entangler(n_qubits, entangler))
    return ParameterizedCircuit(n_qubits, tuple(gates), slot)


def build_random_pqc(n_qubits: int, n_params: int, seed) -> ParameterizedCircuit:
    """Seed-deterministic random circuit: rotation axes drawn uniformly from
    {RX, RY, RZ}, one rotation per qubit round-robin, a CNOT ring after every
    full round of rotations."""
    if n_params < 1:
        raise UsageError("n_params must be >= 1")
    rng = np.random.default_rng(seed)
    kinds = rng.choice(np.array(ROTATION_KINDS), size=n_params)
    gates: list[Gate] = []
    for slot in range(n_params):
        gates.append(Gate(str(kinds[slot]), (slot % n_qubits,), parameter_slot=slot))
        if slot % n_qubits == n_qubits - 1:
            gates.extend(_entangler(n_qubits, "ring"))
    return ParameterizedCircuit(n_qubits, tuple(gates), n_params)


def pauli_rotation_gates(pauli: dict[int, str], slot: int) -> list[Gate]:
    """Gate sequence for exp(-i * theta/2 * P), P a multi-qubit Pauli string.

    Basis changes map each factor to Z, a CNOT ladder accumulates parity onto
    the last involved qubit, and a single RZ carries the parameter.
    """
    if not pauli:
        raise UsageError("Pauli string must act on at least one qubit")
    qubits = sorted(pauli)
    enter: list[Gate] = []
    leave: list[Gate] = []
    rx_plus = Gate("U", (0,), matrix=rotation_matrix("RX", np.pi / 2))
    rx_minus = Gate("U", (0,), matrix=rotation_matrix("RX", -np.pi / 2))
    for q in qubits:
        letter = pauli[q]
        if letter == "X":
            enter.append(Gate("H", (q,)))
            leave.append(Gate("H", (q,)))
        elif letter == "Y":
            enter.append(Gate("U", (q,), matrix=rx_plus.matrix))
            leave.append(Gate("U", (q,), matrix=rx_minus.matrix))
        elif letter != "Z":
            raise UsageError(f"unknown Pauli letter {letter!r}")
    ladder = [Gate("CNOT", (qubits[i], qubits[i + 1])) for i in range(len(qubits) - 1)]
    middle = [Gate("RZ", (qubits[-1],), parameter_slot=slot)]
    return enter + ladder + middle + ladder[::-1] + leave[::-1]


def build_h2_ansatz(include_singles: bool = False) -> ParameterizedCircuit:
    """Particle-preserving ansatz for the shipped 4-qubit H2 problem.

    X gates prepare the Hartree-Fock determinant |1100>; one Pauli rotation
    rotates it toward the doubly-excited |0011>, which spans the exact ground
    state.  With ``include_singles`` two single-excitation rotations are added
    (3 parameters total).
    """
    gates: list[Gate] = [Gate("X", (0,)), Gate("X", (1,))]
    gates += pauli_rotation_gates({0: "Y", 1: "X", 2: "X", 3: "X"}, slot=0)
    n_params = 1
    if include_singles:
        gates += pauli_rotation_gates({0: "Y", 1: "Z", 2: "X"}, slot=1)
        gates += pauli_rotation_gates({1: "Y", 2: "Z", 3: "X"}, slot=2)
        n_params = 3
    return ParameterizedCircuit(4, tuple(gates), n_params)


def circuit_unitary(circuit: ParameterizedCircuit, theta) -> np.ndarray:
    """Dense product of gate matrices; oracle for evaluate_state."""
    theta = as_parameter_vector(theta, circuit.n_params)
    dim = 2 ** circuit.n_qubits
    total = np.eye(dim, dtype=complex)
    for gate in circuit.gates:
        angle = theta[gate.parameter_slot] if gate.is_parameterized else None
        total = gate_unitary(gate, angle, circuit.n_qubits) @ total
    return total


def format_circuit(circuit: ParameterizedCircuit) -> str:
    """Text form, one gate per line; kind U is not representable."""
    lines = []
    for g in circuit.gates:
        if g.kind == "U":
            raise UsageError("fixed-unitary gates have no text representation")
        targets = " ".join(str(t) for t in g.targets)
        slot = f" slot={g.parameter_slot}" if g.is_parameterized else ""
        lines.append(f"{g.kind} {targets}{slot}")
    return "\n".join(lines) + "\n"


def parse_circuit(text: str, n_qubits: int | None = None) -> ParameterizedCircuit:
    """Parse the one-gate-per-line format (`RY 0 slot=3`, `CNOT 0 1`, `X 2`)."""
    gates: list[Gate] = []
    max_qubit = -1
    max_slot = -1
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split()
        kind = fields[0].upper()
        targets = []
        slot = None
        for token in fields[1:]:
            if token.startswith("slot="):
                slot = int(token[5:])
            elif token.isdigit():
                targets.append(int(token))
            else:
                raise IngestionError(f"line {lineno}: bad token {token!r}")
        try:
            gates.append(Gate(kind, tuple(targets), parameter_slot=slot))
        except UsageError as exc:
            raise IngestionError(f"line {lineno}: {exc}") from None
        max_qubit = max(max_qubit, *targets)
        if slot is not None:
            max_slot = max(max_slot, slot)
    if not gates:
        raise IngestionError("no gates found")
    n = n_qubits if n_qubits is not None else max_qubit + 1
    return ParameterizedCircuit(n, tuple(gates), max_slot + 1)


def load_circuit(path: str | Path, n_qubits: int | None = None) -> ParameterizedCircuit:
    return parse_circuit(Path(path).read_text(encoding="utf-8"), n_qubits)
