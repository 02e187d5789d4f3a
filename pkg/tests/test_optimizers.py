"""Optimizer steps, warm start, schedules, and the reduction identities."""
import numpy as np
import pytest

from laws_vqa.circuits import CostFunction, ParameterizedCircuit, cost
from laws_vqa.core import Gate
from laws_vqa.differentiation import MetricTensor, parameter_shift_gradient
from laws_vqa.errors import ConfigError, NumericError, UsageError
from laws_vqa.hamiltonian import PauliString, PauliSumHamiltonian
from laws_vqa.optimizers import (
    OPTIMIZER_NAMES,
    Objective,
    OptimizerConfig,
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


def rx_cost(coeffs=((1.0, "Z"),)):
    """1-qubit RX(theta) circuit; with H = Z0 the cost is cos(theta)."""
    circuit = ParameterizedCircuit(1, (Gate("RX", (0,), parameter_slot=0),), 1)
    terms = tuple(PauliString(c, {0: p} if p else {}) for c, p in coeffs)
    return CostFunction(circuit, PauliSumHamiltonian(1, terms))


def one_minus_cos_cost():
    """cost(theta) = 1 - cos(theta): identity term plus -Z0 on an RX circuit."""
    return rx_cost(coeffs=((1.0, None), (-1.0, "Z")))


def identity_metric(n):
    return lambda theta: MetricTensor(np.eye(n), damping=0.0)


class TestSgd:
    def test_zero_gradient_fixed_point(self):
        state = init_state([0.3, -0.2])
        out = sgd_step(state, np.zeros(2), 0.1)
        assert np.array_equal(out.theta, state.theta)

    def test_arithmetic(self):
        out = sgd_step(init_state([1.0]), np.array([2.0]), 0.1)
        assert out.theta == pytest.approx([0.8])

    def test_two_half_steps_equal_one(self):
        grad = np.array([0.7, -1.3])
        one = sgd_step(init_state([0.0, 0.0]), grad, 0.2)
        two = sgd_step(sgd_step(init_state([0.0, 0.0]), grad, 0.1), grad, 0.1)
        assert np.allclose(one.theta, two.theta, atol=1e-15)

    def test_nonfinite_gradient_aborts(self):
        with pytest.raises(NumericError, match="component 1"):
            sgd_step(init_state([0.0, 0.0]), np.array([0.0, np.nan]), 0.1)

    def test_fast_weights_track_theta(self):
        out = sgd_step(init_state([1.0]), np.array([1.0]), 0.5)
        assert np.array_equal(out.fast, out.theta)
        assert out.iteration == 1


class TestAdagrad:
    def test_first_step_self_normalizes(self):
        out = adagrad_step(init_state([0.0]), np.array([3.0]), eta=1.0, epsilon=0.0)
        assert out.theta == pytest.approx([-1.0], abs=1e-15)

    def test_frozen_once_gradients_vanish(self):
        state = adagrad_step(init_state([0.0]), np.array([3.0]), 1.0)
        for _ in range(5):
            state = adagrad_step(state, np.zeros(1), 1.0)
        assert state.theta == pytest.approx([-1.0 * 3.0 / (3.0 + 1e-8)], abs=1e-12)

    def test_matches_reference_accumulation(self):
        rng = np.random.default_rng(4)
        grads = [rng.standard_normal(3) for _ in range(10)]
        state = init_state(np.zeros(3))
        theta_ref = np.zeros(3)
        accum = np.zeros(3)
        for g in grads:
            state = adagrad_step(state, g, 0.3, epsilon=1e-8)
            accum += g ** 2
            theta_ref = theta_ref - 0.3 / (np.sqrt(accum) + 1e-8) * g
            assert np.allclose(state.theta, theta_ref, atol=1e-12)


class TestAdam:
    def test_zero_gradients_from_start(self):
        state = init_state([0.4])
        for _ in range(3):
            state = adam_step(state, np.zeros(1), 0.1)
        assert state.theta == pytest.approx([0.4], abs=1e-15)

    def test_constant_gradient_closed_form(self):
        """m_t = g(1 - b1^t), v_t = g^2(1 - b2^t): recompute every step."""
        g = np.array([0.8])
        b1, b2, eps, eta = 0.9, 0.999, 1e-8, 0.05
        state = init_state([0.0])
        theta_ref = 0.0
        for t in range(1, 21):
            state = adam_step(state, g, eta, b1, b2, eps)
            m = g[0] * (1 - b1 ** t)
            v = g[0] ** 2 * (1 - b2 ** t)
            theta_ref = theta_ref - eta * m / (np.sqrt(v) + eps)
            assert state.theta[0] == pytest.approx(theta_ref, abs=1e-12)

    def test_constant_gradient_asymptotic_step(self):
        """Step magnitude approaches eta*|g|/(|g|+eps): geometric-series limit."""
        g = np.array([0.8])
        state = init_state([0.0])
        prev = state.theta[0]
        for _ in range(20000):
            prev = state.theta[0]
            state = adam_step(state, g, 0.05)
        limit = 0.05 * 0.8 / (0.8 + 1e-8)
        assert abs(prev - state.theta[0]) == pytest.approx(limit, abs=1e-6)

    def test_matches_reference_recomputation(self):
        rng = np.random.default_rng(9)
        grads = [rng.standard_normal(2) for _ in range(20)]
        state = init_state(np.zeros(2))
        m = np.zeros(2)
        v = np.zeros(2)
        theta_ref = np.zeros(2)
        for g in grads:
            state = adam_step(state, g, 0.02, 0.9, 0.999, 1e-8)
            m = 0.9 * m + 0.1 * g
            v = 0.999 * v + 0.001 * g ** 2
            theta_ref = theta_ref - 0.02 * m / (np.sqrt(v) + 1e-8)
            assert np.allclose(state.theta, theta_ref, atol=1e-12)


class TestQng:
    def test_identity_metric_reduces_to_sgd(self):
        cf = rx_cost()
        config = OptimizerConfig(eta=0.1, delta=0.0)
        objective = Objective(
            n_params=1,
            cost=lambda th: cost(cf, th),
            gradient=lambda th: parameter_shift_gradient(cf, th),
            metric=identity_metric(1),
        )
        qng_state, _ = make_step_driver("qng", config)(init_state([0.7]), objective)
        sgd_state, _ = make_step_driver("sgd", config)(init_state([0.7]), objective)
        assert np.allclose(qng_state.theta, sgd_state.theta, atol=1e-14)

    def test_ry_metric_gives_four_times_vanilla(self):
        """F = 0.25 on the single-rotation circuit, so the step is 4x SGD's."""
        circuit = ParameterizedCircuit(1, (Gate("RY", (0,), parameter_slot=0),), 1)
        cf = CostFunction(circuit, PauliSumHamiltonian(1, (PauliString(1.0, {0: "Z"}),)))
        theta0 = np.array([0.6])
        out = qng_step(init_state(theta0), cf, eta=0.05, delta=0.0)
        grad = parameter_shift_gradient(cf, theta0)
        assert out.theta == pytest.approx(theta0 - 0.05 * 4.0 * grad, abs=1e-12)

    def test_converges_on_cos_cost(self):
        """Matches the scalar recurrence theta += 0.4 sin(theta) and reaches -1."""
        cf = rx_cost()
        state = init_state([0.1])
        ref = 0.1
        for _ in range(200):
            state = qng_step(state, cf, eta=0.1, delta=0.0)
            ref = ref + 0.4 * np.sin(ref)
            assert state.theta[0] == pytest.approx(ref, abs=1e-9)
            if abs(cost(cf, state.theta) - (-1.0)) < 1e-6:
                break
        assert abs(cost(cf, state.theta) - (-1.0)) < 1e-6
        assert state.iteration <= 200


class TestLrSchedule:
    def test_theorem1_at_t1(self):
        for k in (1, 3, 5):
            assert lr_schedule("theorem1", 1, k, 5, c0=1.0) == pytest.approx(1.0 / 7.0)

    def test_theorem1_direct_substitution(self):
        assert lr_schedule("theorem1", 2, 3, 5, c0=1.0) == pytest.approx(1.0 / 10.0)

    def test_constant(self):
        assert lr_schedule("constant", 7, 2, 5, mu0=0.25) == 0.25

    def test_bounds_checked(self):
        with pytest.raises(UsageError):
            lr_schedule("theorem1", 0, 1, 5)
        with pytest.raises(UsageError):
            lr_schedule("theorem1", 1, 6, 5)


class TestWarmStart:
    def test_strategies_coincide_at_k1(self):
        grad = lambda th: np.sin(th)
        a = warm_start(np.array([0.9, -0.4]), "inner-sgd", 1, 0.3, grad)
        b = warm_start(np.array([0.9, -0.4]), "averaged-at-theta", 1, 0.3, grad)
        assert np.allclose(a, b, atol=1e-15)

    def test_zero_gradients_fixed_point(self):
        for strategy in ("inner-sgd", "averaged-at-theta", "ema"):
            out = warm_start(np.array([1.0, 2.0]), strategy, 4, 0.5, lambda th: np.zeros(2))
            assert np.allclose(out, [1.0, 2.0], atol=1e-15)

    def test_inner_sgd_equals_manual_steps(self):
        grad = lambda th: np.sin(th)
        out = warm_start(np.array([0.8]), "inner-sgd", 5, 0.2, grad)
        v = np.array([0.8])
        for _ in range(5):
            v = v - 0.2 * np.sin(v)
        assert np.allclose(out, v, atol=1e-14)

    def test_ema_reweights_inner_steps(self):
        """theta_warm = theta + (1-b) sum_k b^(K-k) * step_k over the inner-sgd path."""
        grad = lambda th: np.cos(th) + 0.5
        beta, mu, K = 0.7, 0.3, 4
        theta0 = np.array([0.2])
        out = warm_start(theta0, "ema", K, mu, grad, beta=beta)
        v = theta0.copy()
        steps = []
        for _ in range(K):
            s = -mu * grad(v)
            steps.append(s)
            v = v + s
        expected = theta0 + sum((1 - beta) * beta ** (K - 1 - k) * steps[k] for k in range(K))
        assert np.allclose(out, expected, atol=1e-14)

    def test_averaged_at_theta_formula(self):
        calls = []

        def grad(th):
            calls.append(th.copy())
            return np.array([2.0])

        theta0 = np.array([1.0])
        out = warm_start(theta0, "averaged-at-theta", 3, 0.3, grad)
        assert all(np.array_equal(c, theta0) for c in calls)
        assert out == pytest.approx([1.0 - 0.3 * 2.0], abs=1e-15)

    def test_locality_bound(self):
        """||theta_warm - theta|| <= sum_k mu_k * max ||grad||."""
        rng = np.random.default_rng(6)
        for strategy in ("inner-sgd", "averaged-at-theta", "ema"):
            norms = []

            def grad(th):
                g = rng.standard_normal(3)
                norms.append(np.linalg.norm(g))
                return g

            theta0 = rng.standard_normal(3)
            out = warm_start(theta0, strategy, 5, 0.4, grad)
            assert np.linalg.norm(out - theta0) <= 5 * 0.4 * max(norms) + 1e-12


class TestLaws:
    def test_zero_gradient_fixed_point(self):
        cf = rx_cost()
        config = OptimizerConfig()
        state = init_state([0.5])
        out, record = laws_step(
            state, cf, config, gradient_source=lambda th: np.zeros(1)
        )
        assert np.allclose(out.theta, state.theta, atol=1e-15)
        assert record.grad_norm == 0.0

    def test_hand_unrolled_k3_on_cos_cost(self):
        """Inner SGD, metric at the warm point, damped-inverse pullback: all
        recomputed with plain numpy formulas."""
        cf = rx_cost()
        config = OptimizerConfig(eta=0.07, mu=0.3, warm_start_steps=3, delta=1e-6)
        theta0 = 1.1
        state, _ = laws_step(init_state([theta0]), cf, config)

        v = theta0
        for _ in range(3):
            v = v - 0.3 * (-np.sin(v))  # d cos/d theta = -sin
        g_t = v - theta0
        f_warm = 0.25  # RX on |0>
        expected = v - (0.07 / 3.0) * (1.0 / (f_warm + 1e-6)) * g_t
        assert state.theta[0] == pytest.approx(expected, abs=1e-12)

    def test_identity_metric_eta_k_one_minus_alpha_is_lookahead(self):
        """With F = I and eta = K(1-alpha): theta = alpha*warm + (1-alpha)*prev."""
        cf = rx_cost()
        alpha = 0.3
        config = OptimizerConfig(eta=5 * (1 - alpha), mu=0.4, warm_start_steps=5, delta=0.0)
        theta0 = np.array([0.9])
        state, _ = laws_step(
            init_state(theta0), cf, config, metric_source=identity_metric(1)
        )
        warm = warm_start(theta0, "inner-sgd", 5, 0.4, lambda th: parameter_shift_gradient(cf, th))
        expected = alpha * warm + (1 - alpha) * theta0
        assert np.allclose(state.theta, expected, atol=1e-12)

    def test_k1_matches_closed_form(self):
        """theta = lam*Finv*prev + (1 - lam*Finv)*warm, analytic inner gradient."""
        cf = rx_cost()
        config = OptimizerConfig(eta=0.2, mu=0.45, warm_start_steps=1, delta=1e-6)
        theta0 = np.array([0.7])
        state, _ = laws_step(init_state(theta0), cf, config)
        warm = theta0 - 0.45 * parameter_shift_gradient(cf, theta0)
        lam_finv = 0.2 / 1.0 * (1.0 / (0.25 + 1e-6))
        closed = lam_finv * theta0 + (1.0 - lam_finv) * warm
        assert np.allclose(state.theta, closed, atol=1e-12)


class TestWssgd:
    def test_delta_one_leaves_theta_unchanged(self):
        """alpha = 0 means Delta_t = 1: no movement regardless of the inner loop."""
        cf = rx_cost()
        config = OptimizerConfig(alpha=0.0, mu=0.5, delta_variant="lookahead")
        state, _ = wssgd_step(init_state([1.2]), cf, config)
        assert state.theta == pytest.approx([1.2], abs=1e-15)

    def test_delta_zero_keeps_pure_warm_start(self):
        cf = rx_cost()
        config = OptimizerConfig(alpha=1.0, mu=0.5, warm_start_steps=4, delta_variant="lookahead")
        theta0 = np.array([1.2])
        state, _ = wssgd_step(init_state(theta0), cf, config)
        warm = warm_start(theta0, "inner-sgd", 4, 0.5, lambda th: parameter_shift_gradient(cf, th))
        assert np.allclose(state.theta, warm, atol=1e-14)

    def test_reduction_identity_lookahead(self):
        """wssgd(lookahead, W=SGD) == (1-alpha) theta + alpha v_K, to 1e-12."""
        cf = rx_cost()
        alpha = 0.4
        config = OptimizerConfig(alpha=alpha, mu=0.35, warm_start_steps=5, delta_variant="lookahead")
        theta0 = np.array([0.8])
        state, _ = wssgd_step(init_state(theta0), cf, config, warm_start_optimizer="sgd")
        v = theta0.copy()
        for _ in range(5):
            v = v - 0.35 * parameter_shift_gradient(cf, v)
        expected = (1 - alpha) * theta0 + alpha * v
        assert np.allclose(state.theta, expected, atol=1e-12)

    def test_reduction_identity_fisher_forced_identity(self):
        """wssgd(fisher) with F = I and lambda_t = alpha equals the same update."""
        cf = rx_cost()
        alpha = 0.4
        config = OptimizerConfig(
            eta=alpha, lambda_mode="eta", mu=0.35, warm_start_steps=5,
            delta_variant="fisher", delta=0.0,
        )
        theta0 = np.array([0.8])
        state, _ = wssgd_step(
            init_state(theta0), cf, config, warm_start_optimizer="sgd",
            metric_source=identity_metric(1),
        )
        v = theta0.copy()
        for _ in range(5):
            v = v - 0.35 * parameter_shift_gradient(cf, v)
        expected = (1 - alpha) * theta0 + alpha * v
        assert np.allclose(state.theta, expected, atol=1e-12)

    def test_fisher_with_identity_reproduces_lookahead_alpha_lambda(self):
        cf = rx_cost()
        lam = 0.23
        base = dict(mu=0.3, warm_start_steps=3)
        fisher = OptimizerConfig(eta=lam, lambda_mode="eta", delta_variant="fisher", delta=0.0, **base)
        looka = OptimizerConfig(alpha=lam, delta_variant="lookahead", **base)
        theta0 = np.array([1.4])
        s_fisher, _ = wssgd_step(init_state(theta0), cf, fisher, metric_source=identity_metric(1))
        s_looka, _ = wssgd_step(init_state(theta0), cf, looka)
        assert np.allclose(s_fisher.theta, s_looka.theta, atol=1e-12)

    def test_adam_like_scale(self):
        """Delta = 1 - lam*sqrt(sum_k g_k^2) applied elementwise."""
        cf = rx_cost()
        config = OptimizerConfig(eta=0.05, mu=0.3, warm_start_steps=3, delta_variant="adam-like")
        theta0 = np.array([0.8])
        state, _ = wssgd_step(init_state(theta0), cf, config, warm_start_optimizer="sgd")
        v = theta0.copy()
        grads = []
        for _ in range(3):
            g = parameter_shift_gradient(cf, v)
            grads.append(g)
            v = v - 0.3 * g
        scale = np.sqrt(sum(g ** 2 for g in grads))
        expected = theta0 + (0.05 / 3.0) * scale * (v - theta0)
        assert np.allclose(state.theta, expected, atol=1e-12)

    def test_inner_adam_runs(self):
        cf = rx_cost()
        config = OptimizerConfig(mu=0.2, warm_start_steps=3, delta_variant="lookahead",
                                 inner_optimizer="adam")
        state, record = wssgd_step(init_state([0.9]), cf, config)
        assert np.isfinite(state.theta).all()
        assert record.iteration == 1


class TestDescentSanity:
    @pytest.mark.parametrize("name", OPTIMIZER_NAMES)
    def test_non_increasing_after_burn_in(self, name):
        """On 1 - cos(theta), every optimizer at defaults descends after iteration 5.

        Adam is the documented exception: its constant-magnitude momentum steps
        oscillate once the iterate reaches the basin floor, so it only gets a
        bounded-overshoot allowance plus a net-descent check.
        """
        cf = one_minus_cos_cost()
        config = OptimizerConfig()
        objective = Objective(
            n_params=1,
            cost=lambda th: cost(cf, th),
            gradient=lambda th: parameter_shift_gradient(cf, th),
            metric=lambda th: MetricTensor(np.array([[0.25]]), damping=config.delta),
        )
        rng = np.random.default_rng(123)
        driver = make_step_driver(name, config)
        allowance = 2 * config.eta if name == "adam" else 1e-12
        for _ in range(20):
            theta0 = rng.uniform(-np.pi, np.pi, size=1)
            state = init_state(theta0)
            costs = [cost(cf, theta0)]
            for _ in range(30):
                state, record = driver(state, objective)
                costs.append(record.cost)
            diffs = np.diff(costs[5:])
            assert np.all(diffs <= allowance), f"{name} increased cost after burn-in: {max(diffs)}"
            if name == "adam":
                assert costs[-1] < costs[0] + 1e-12


class TestDriverRegistry:
    def test_unknown_name_rejected(self):
        with pytest.raises(ConfigError, match="registered"):
            make_step_driver("lawz", OptimizerConfig())

    @pytest.mark.parametrize("name", OPTIMIZER_NAMES)
    def test_zero_gradients_are_a_fixed_point(self, name):
        objective = Objective(
            n_params=2,
            cost=lambda th: 1.0,
            gradient=lambda th: np.zeros(2),
            metric=lambda th: MetricTensor(0.25 * np.eye(2), damping=1e-6),
        )
        theta0 = np.array([0.4, -1.1])
        state = init_state(theta0)
        for _ in range(3):
            state, _ = make_step_driver(name, OptimizerConfig())(state, objective)
        assert np.allclose(state.theta, theta0, atol=1e-15)

    def test_all_names_step_once(self):
        cf = rx_cost()
        objective = Objective(
            n_params=1,
            cost=lambda th: cost(cf, th),
            gradient=lambda th: parameter_shift_gradient(cf, th),
            metric=lambda th: MetricTensor(np.array([[0.25]]), damping=1e-6),
        )
        for name in OPTIMIZER_NAMES:
            state, record = make_step_driver(name, OptimizerConfig())(init_state([0.6]), objective)
            assert state.iteration == 1
            assert np.isfinite(record.cost)


class TestConfigValidation:
    def test_negative_rate_rejected(self):
        with pytest.raises(ConfigError):
            OptimizerConfig(eta=-0.1)

    def test_bad_variant_rejected(self):
        with pytest.raises(ConfigError):
            OptimizerConfig(delta_variant="newton")

    def test_k_must_be_positive(self):
        with pytest.raises(ConfigError):
            OptimizerConfig(warm_start_steps=0)

    def test_lambda_modes(self):
        assert OptimizerConfig(eta=0.5, warm_start_steps=5).lambda_t == pytest.approx(0.1)
        assert OptimizerConfig(eta=0.5, lambda_mode="eta").lambda_t == pytest.approx(0.5)
