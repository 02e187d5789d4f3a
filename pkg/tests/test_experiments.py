"""Experiment pipelines: datasets, determinism, traces, the variational bound."""
import numpy as np
import pytest

from laws_vqa.errors import ConfigError, IngestionError
from laws_vqa.experiments import (
    H2_REFERENCE_ENERGY,
    load_h2_hamiltonian,
    load_iris,
    run_bp_scan,
    run_h2_vqe,
    run_iris_classifier,
    run_random_pqc,
)
from laws_vqa.hamiltonian import exact_ground_energy
from laws_vqa.optimizers import Objective, OptimizerConfig, TraceRecord


CONFIG = OptimizerConfig()


def records_equal(a: TraceRecord, b: TraceRecord) -> bool:
    """Bit-identical comparison, wall_ms excluded."""
    return (
        a.iteration == b.iteration
        and a.cost == b.cost
        and a.grad_norm == b.grad_norm
        and a.extra == b.extra
    )


class TestLoadIris:
    def test_split_sizes(self):
        ds = load_iris(seed=0, train_fraction=0.75)
        assert len(ds.samples) == 100
        assert len(ds.train_indices) == 75
        assert len(ds.val_indices) == 25

    def test_features_normalized(self):
        ds = load_iris(seed=0)
        for features, label in ds.samples:
            assert np.linalg.norm(features) == pytest.approx(1.0, abs=1e-12)
            assert label in (-1, 1)

    def test_same_seed_same_split(self):
        a = load_iris(seed=3)
        b = load_iris(seed=3)
        assert a.train_indices == b.train_indices
        assert a.val_indices == b.val_indices

    def test_both_classes_present(self):
        ds = load_iris(seed=0)
        labels = {y for _, y in ds.samples}
        assert labels == {-1, 1}

    def test_malformed_row_names_line(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("f1,f2,f3,f4,label\n1,2,3,4,0\n1,2,oops,4,1\n")
        with pytest.raises(IngestionError, match="line 3"):
            load_iris(path, seed=0)

    def test_wrong_column_count(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("1,2,3,0\n")
        with pytest.raises(IngestionError, match="line 1"):
            load_iris(path, seed=0)

    def test_single_class_rejected(self, tmp_path):
        path = tmp_path / "one.csv"
        path.write_text("1,2,3,4,1\n2,3,4,5,1\n")
        with pytest.raises(IngestionError, match="two classes"):
            load_iris(path, seed=0)

    def test_missing_file(self):
        with pytest.raises(ConfigError):
            load_iris("no/such/file.csv", seed=0)

    def test_plus_minus_labels_kept(self, tmp_path):
        path = tmp_path / "pm.csv"
        path.write_text("1,2,3,4,-1\n2,3,4,5,1\n1.5,2,3,4,-1\n2.5,3,4,5,1\n")
        ds = load_iris(path, seed=0, train_fraction=0.5)
        assert {y for _, y in ds.samples} == {-1, 1}


class TestRandomPqc:
    def test_zero_iterations_logs_initial_cost_only(self):
        result = run_random_pqc("sgd", CONFIG, seed=1, iterations=0)
        assert len(result.trace) == 1
        assert result.trace[0].iteration == 0

    def test_same_seed_identical_traces(self):
        a = run_random_pqc("laws", CONFIG, seed=4, iterations=5)
        b = run_random_pqc("laws", CONFIG, seed=4, iterations=5)
        assert all(records_equal(x, y) for x, y in zip(a.trace, b.trace))
        assert np.array_equal(a.final_theta, b.final_theta)

    def test_initial_cost_shared_across_optimizers(self):
        """Same seed means same theta_0, isolating the optimizer effect."""
        costs = {
            name: run_random_pqc(name, CONFIG, seed=9, iterations=0).trace[0].cost
            for name in ("sgd", "qng", "laws")
        }
        assert len(set(costs.values())) == 1

    def test_trace_length_is_iterations_plus_one(self):
        result = run_random_pqc("sgd", CONFIG, seed=2, iterations=7)
        assert len(result.trace) == 8
        assert [r.iteration for r in result.trace] == list(range(8))

    def test_metadata_fields(self):
        result = run_random_pqc("sgd", CONFIG, seed=2, iterations=1)
        for key in ("experiment", "optimizer", "seed", "config", "provenance", "aborted"):
            assert key in result.metadata


class TestH2Vqe:
    def test_hamiltonian_gate_accepts_shipped_file(self):
        h2 = load_h2_hamiltonian()
        assert exact_ground_energy(h2) == pytest.approx(H2_REFERENCE_ENERGY, abs=5e-4)

    def test_gate_rejects_wrong_hamiltonian(self, tmp_path):
        path = tmp_path / "h.txt"
        path.write_text("1.0 Z0\n0.1 Z1\n0.1 Z2\n0.1 Z3\n")
        with pytest.raises(ConfigError, match="ground-energy gate"):
            run_h2_vqe("sgd", CONFIG, seed=0, iterations=1, hamiltonian_path=path)

    def test_initial_energy_is_hartree_fock(self):
        result = run_h2_vqe("sgd", CONFIG, seed=0, iterations=0)
        assert result.trace[0].cost > H2_REFERENCE_ENERGY
        assert result.trace[0].cost == pytest.approx(-1.117349, abs=1e-5)

    def test_trace_respects_variational_bound(self):
        result = run_h2_vqe("laws", CONFIG, seed=1, iterations=40)
        ground = result.metadata["ground_energy"]
        for record in result.trace:
            assert record.cost >= ground - 1e-9
            assert record.cost >= H2_REFERENCE_ENERGY - 1e-9

    def test_seed_does_not_change_dynamics(self):
        """The VQE gradient source is analytic, so traces are seed-independent."""
        a = run_h2_vqe("laws", CONFIG, seed=1, iterations=5)
        b = run_h2_vqe("laws", CONFIG, seed=99, iterations=5)
        assert all(records_equal(x, y) for x, y in zip(a.trace, b.trace))


class TestIrisClassifier:
    def test_trace_has_accuracies(self):
        result = run_iris_classifier("sgd", CONFIG, seed=1, iterations=2)
        for record in result.trace:
            assert 0.0 <= record.extra["acc_train"] <= 1.0
            assert 0.0 <= record.extra["acc_val"] <= 1.0
            assert record.cost >= 0.0

    def test_deterministic_under_seed(self):
        a = run_iris_classifier("wssgd", CONFIG, seed=2, iterations=2)
        b = run_iris_classifier("wssgd", CONFIG, seed=2, iterations=2)
        assert all(records_equal(x, y) for x, y in zip(a.trace, b.trace))

    def test_bad_batch_size(self):
        with pytest.raises(ConfigError):
            run_iris_classifier("sgd", CONFIG, seed=1, iterations=1, batch_size=0)


class TestBpScan:
    def test_row_per_qubit_count(self):
        rows = run_bp_scan(seed=0, qubit_range=(2, 3), n_samples=30, depth_factor=2)
        assert [r.n_qubits for r in rows] == [2, 3]
        assert all(r.n_samples == 30 for r in rows)

    def test_depth_factor_validated(self):
        with pytest.raises(ConfigError):
            run_bp_scan(seed=0, depth_factor=0)


class TestNumericAbort:
    def test_partial_trace_kept_with_abort_flag(self):
        from laws_vqa.experiments import _run_loop

        calls = {"n": 0}

        def bad_gradient(theta):
            calls["n"] += 1
            if calls["n"] >= 3:
                return np.array([np.nan])
            return np.array([0.1])

        objective = Objective(
            n_params=1,
            cost=lambda th: float(th[0] ** 2),
            gradient=bad_gradient,
        )
        result = _run_loop(objective, "sgd", CONFIG, np.array([1.0]), 10, {"experiment": "test"})
        assert result.aborted
        assert 1 <= len(result.trace) < 11
        assert "abort_reason" in result.metadata
