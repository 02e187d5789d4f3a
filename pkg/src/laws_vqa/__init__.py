"""Statevector workbench for warm-start and natural-gradient optimization of
variational quantum circuits."""

__version__ = "0.1.0"

from .core import Gate, StateVector, apply_gate, basis_state, zero_state
from .hamiltonian import (
    PauliString,
    PauliSumHamiltonian,
    exact_ground_energy,
    expectation,
    load_hamiltonian,
    parse_hamiltonian,
)
from .circuits import (
    CostFunction,
    ParameterizedCircuit,
    build_h2_ansatz,
    build_hardware_efficient,
    build_random_pqc,
    cost,
    evaluate_state,
    load_circuit,
    parse_circuit,
)
from .differentiation import (
    MetricTensor,
    bp_variance_scan,
    damped_pseudo_inverse,
    finite_difference_gradient,
    fubini_study_metric,
    parameter_shift_gradient,
    quantum_geometric_tensor,
    stochastic_gradient,
)
from .optimizers import (
    Objective,
    OptimizerConfig,
    OptimizerState,
    TraceRecord,
    adagrad_step,
    adam_step,
    init_state,
    laws_step,
    lr_schedule,
    make_step_driver,
    qng_step,
    sgd_step,
    warm_start,
    wssgd_step,
)
from .classifier import ClassifierModel, amplitude_encode
from .experiments import (
    Dataset,
    ExperimentResult,
    load_iris,
    run_bp_scan,
    run_h2_vqe,
    run_iris_classifier,
    run_random_pqc,
)

__all__ = [name for name in dir() if not name.startswith("_")]
