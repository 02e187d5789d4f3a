"""Pauli-sum observables: expectation values, exact diagonalization, file I/O.

Expectation values act term-by-term on the statevector (O(2^n) per term);
dense matrices are built only inside oracles and the diagonalization helper.

File format, one term per line::

    # comment
    -0.2427450 Z0 Z1
    0.1714128 Z0
    -0.8105479            <- identity term: coefficient with no operators
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .core import PAULI_X, PAULI_Y, PAULI_Z, StateVector, apply_pauli
from .errors import CapabilityError, IngestionError, UsageError

_PAULI_MATS = {"X": PAULI_X, "Y": PAULI_Y, "Z": PAULI_Z}

MAX_DENSE_QUBITS = 12


@dataclass(frozen=True)
class PauliString:
    """A real coefficient times a product of single-qubit Paulis (identity elsewhere)."""

    coefficient: float
    operators: dict[int, str] = field(default_factory=dict)

    def __post_init__(self):
        if not np.isfinite(self.coefficient):
            raise UsageError("Pauli coefficient must be finite")
        ops = {}
        for q, p in self.operators.items():
            q = int(q)
            if q < 0:
                raise UsageError(f"negative qubit index {q}")
            if p not in _PAULI_MATS:
                raise UsageError(f"unknown Pauli letter {p!r}")
            ops[q] = p
        object.__setattr__(self, "operators", ops)

    def apply(self, amps: np.ndarray, n_qubits: int) -> np.ndarray:
        out = amps
        for q, p in self.operators.items():
            out = apply_pauli(out, q, p, n_qubits)
        return out


@dataclass(frozen=True)
class PauliSumHamiltonian:
    """Real-weighted sum of Pauli strings; Hermitian by construction."""

    n_qubits: int
    terms: tuple[PauliString, ...]

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))
        for term in self.terms:
            if term.operators and max(term.operators) >= self.n_qubits:
                raise UsageError(
                    f"term {format_term(term)!r} addresses qubit beyond {self.n_qubits}"
                )


def expectation(state: StateVector, hamiltonian: PauliSumHamiltonian) -> float:
    """<psi|H|psi>, asserted real to 1e-10 before the imaginary residue is dropped."""
    if state.n_qubits != hamiltonian.n_qubits:
        raise UsageError(
            f"state has {state.n_qubits} qubits, Hamiltonian has {hamiltonian.n_qubits}"
        )
    amps = state.amplitudes
    value = 0.0 + 0.0j
    for term in hamiltonian.terms:
        value += term.coefficient * np.vdot(amps, term.apply(amps, state.n_qubits))
    if abs(value.imag) >= 1e-10:
        raise UsageError(f"expectation has imaginary residue {value.imag:.3e}")
    return float(value.real)


def dense_matrix(hamiltonian: PauliSumHamiltonian) -> np.ndarray:
    """Dense 2^n x 2^n Hermitian matrix. Oracle / small-system use only."""
    n = hamiltonian.n_qubits
    if n > MAX_DENSE_QUBITS:
        raise CapabilityError(f"dense matrix limited to {MAX_DENSE_QUBITS} qubits, got {n}")
    dim = 2 ** n
    mat = np.zeros((dim, dim), dtype=complex)
    for term in hamiltonian.terms:
        factor = np.array([[term.coefficient]], dtype=complex)
        for q in range(n):
            factor = np.kron(factor, _PAULI_MATS.get(term.operators.get(q), np.eye(2)))
        mat += factor
    return mat


def exact_ground_energy(hamiltonian: PauliSumHamiltonian) -> float:
    """Smallest eigenvalue of the dense matrix; the variational floor."""
    return float(np.linalg.eigvalsh(dense_matrix(hamiltonian))[0])


def format_term(term: PauliString) -> str:
    ops = " ".join(f"{p}{q}" for q, p in sorted(term.operators.items()))
    return f"{term.coefficient:.14g} {ops}".strip()


def format_hamiltonian(hamiltonian: PauliSumHamiltonian) -> str:
    return "\n".join(format_term(t) for t in hamiltonian.terms) + "\n"


def parse_hamiltonian(text: str, n_qubits: int | None = None) -> PauliSumHamiltonian:
    """Parse the one-term-per-line format; infers qubit count when not given."""
    terms = []
    max_qubit = -1
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split()
        try:
            coeff = float(fields[0])
        except ValueError:
            raise IngestionError(f"line {lineno}: bad coefficient {fields[0]!r}") from None
        ops: dict[int, str] = {}
        for token in fields[1:]:
            letter, index = token[0].upper(), token[1:]
            if letter not in _PAULI_MATS or not index.isdigit():
                raise IngestionError(f"line {lineno}: bad operator token {token!r}")
            q = int(index)
            if q in ops:
                raise IngestionError(f"line {lineno}: qubit {q} repeated")
            ops[q] = letter
            max_qubit = max(max_qubit, q)
        terms.append(PauliString(coeff, ops))
    if not terms:
        raise IngestionError("no Hamiltonian terms found")
    inferred = max_qubit + 1 if max_qubit >= 0 else 1
    return PauliSumHamiltonian(n_qubits if n_qubits is not None else inferred, tuple(terms))


def load_hamiltonian(path: str | Path, n_qubits: int | None = None) -> PauliSumHamiltonian:
    return parse_hamiltonian(Path(path).read_text(encoding="utf-8"), n_qubits)
