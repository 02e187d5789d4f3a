"""Optimizer steps: SGD, AdaGrad, Adam, QNG, Lookahead-style warm-start
interpolation (WS-SGD), and LAWS.

All steps are pure functions from an OptimizerState to a new one.  The
warm-start family runs an inner loop of K cheap first-order steps from the
current iterate ("look around"), then blends the inner result back:

    v_0 = theta_{t-1};  v_k = v_{k-1} - mu_k * grad(v_{k-1})
    theta_t = theta_warm - (eta_t / K) * pinv(F + delta I) (theta_warm - theta_{t-1})   (LAWS)
    theta_t = Delta_t theta_{t-1} + (1 - Delta_t) theta_warm                            (WS-SGD)

where F is the Fubini-Study metric evaluated at the warm-start point.  The
WS-SGD reparameterization coefficient Delta_t comes in three flavors:
scalar (1 - alpha, plain Lookahead), metric (fisher), and elementwise
accumulated-gradient (adam-like); in all three, Delta_t = I recovers a no-op
and Delta_t = 0 a pure warm start.

Sign convention: the inner loop subtracts gradients, so the "accumulated
gradient" g_t = theta_warm - theta_{t-1} is the sum of the signed inner
steps.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from .circuits import CostFunction, cost
from .differentiation import (
    DEFAULT_CUTOFF,
    DEFAULT_DAMPING,
    MetricTensor,
    damped_pseudo_inverse,
    fubini_study_metric,
    parameter_shift_gradient,
)
from .errors import ConfigError, NumericError, UsageError

SCHEDULES = ("constant", "theorem1")
WARM_START_STRATEGIES = ("inner-sgd", "averaged-at-theta", "ema")
DELTA_VARIANTS = ("lookahead", "fisher", "adam-like")
INNER_OPTIMIZERS = ("sgd", "adagrad", "adam")
LAMBDA_MODES = ("eta-over-k", "eta")

GradientSource = Callable[[np.ndarray], np.ndarray]
MetricSource = Callable[[np.ndarray], MetricTensor]


@dataclass(frozen=True)
class OptimizerConfig:
    """Hyperparameters shared by every optimizer; unused fields are ignored."""

    eta: float = 0.01                    # outer learning rate
    mu: float = 0.5                      # warm-start (inner) learning rate
    warm_start_steps: int = 5            # K
    alpha: float = 0.5                   # Lookahead interpolation weight
    beta1: float = 0.9
    beta2: float = 0.999
    beta: float = 0.9                    # EMA mixing for warm-start accumulation
    epsilon: float = 1e-8
    delta: float = DEFAULT_DAMPING       # metric damping
    cutoff: float = DEFAULT_CUTOFF       # pseudo-inverse eigenvalue cutoff
    c0: float = 1.0
    schedule: str = "constant"
    warm_start_strategy: str = "inner-sgd"
    delta_variant: str = "fisher"
    inner_optimizer: str = "sgd"
    lambda_mode: str = "eta-over-k"      # lambda_t = eta/K (as in the update rule) or eta itself

    def __post_init__(self):
        for name in ("eta", "mu", "beta1", "beta2", "beta", "c0"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0):
                raise ConfigError(f"{name} must be positive and finite, got {value}")
        for name in ("beta1", "beta2", "beta"):
            if not getattr(self, name) < 1:
                raise ConfigError(f"{name} must be in (0, 1)")
        if not 0.0 <= self.alpha <= 1.0:
            raise ConfigError(f"alpha must be in [0, 1], got {self.alpha}")
        if not self.c0 <= 1.0:
            raise ConfigError(f"c0 must be in (0, 1], got {self.c0}")
        if self.warm_start_steps < 1:
            raise ConfigError("warm_start_steps must be >= 1")
        if self.epsilon < 0 or self.delta < 0 or self.cutoff < 0:
            raise ConfigError("epsilon, delta and cutoff must be >= 0")
        for name, allowed in (
            ("schedule", SCHEDULES),
            ("warm_start_strategy", WARM_START_STRATEGIES),
            ("delta_variant", DELTA_VARIANTS),
            ("inner_optimizer", INNER_OPTIMIZERS),
            ("lambda_mode", LAMBDA_MODES),
        ):
            if getattr(self, name) not in allowed:
                raise ConfigError(f"{name} must be one of {allowed}, got {getattr(self, name)!r}")

    @property
    def lambda_t(self) -> float:
        if self.lambda_mode == "eta-over-k":
            return self.eta / self.warm_start_steps
        return self.eta


@dataclass(frozen=True)
class OptimizerState:
    """Slow weights, inner iterate, step counters and moment accumulators."""

    theta: np.ndarray
    fast: np.ndarray
    iteration: int = 0
    inner_step: int = 0
    first_moment: np.ndarray | None = None
    second_moment: np.ndarray | None = None
    rng: np.random.Generator | None = None

    def __post_init__(self):
        object.__setattr__(self, "theta", np.array(self.theta, dtype=float))
        object.__setattr__(self, "fast", np.array(self.fast, dtype=float))


def init_state(theta, rng: np.random.Generator | None = None) -> OptimizerState:
    theta = np.asarray(theta, dtype=float)
    return OptimizerState(theta=theta, fast=theta, rng=rng)


@dataclass(frozen=True)
class TraceRecord:
    """One logged iteration."""

    iteration: int
    cost: float
    grad_norm: float
    wall_ms: float
    extra: dict[str, float] = field(default_factory=dict)


def _require_finite(vector: np.ndarray, what: str, iteration: int) -> np.ndarray:
    vector = np.asarray(vector, dtype=float)
    if not np.all(np.isfinite(vector)):
        bad = int(np.argmax(~np.isfinite(vector)))
        raise NumericError(f"non-finite {what} at iteration {iteration}, component {bad}")
    return vector


def lr_schedule(schedule: str, t: int, k: int, K: int, c0: float = 1.0, mu0: float = 0.5) -> float:
    """Inner learning rate mu_k^t: constant, or c0 / ((t-1) k + K + 2)."""
    if t < 1 or not 1 <= k <= K:
        raise UsageError(f"need t >= 1 and 1 <= k <= K, got t={t}, k={k}, K={K}")
    if schedule == "constant":
        return mu0
    if schedule == "theorem1":
        return c0 / ((t - 1) * k + K + 2)
    raise UsageError(f"unknown schedule {schedule!r}")


def _inner_rates(config: OptimizerConfig, t: int) -> list[float]:
    K = config.warm_start_steps
    return [lr_schedule(config.schedule, t, k, K, config.c0, config.mu) for k in range(1, K + 1)]


# ---------------------------------------------------------------------------
# plain first-order steps


def sgd_step(state: OptimizerState, grad: np.ndarray, eta: float) -> OptimizerState:
    """theta <- theta - eta * grad."""
    grad = _require_finite(grad, "gradient", state.iteration + 1)
    theta = state.theta - eta * grad
    return replace(state, theta=theta, fast=theta, iteration=state.iteration + 1)


def adagrad_step(
    state: OptimizerState, grad: np.ndarray, eta: float, epsilon: float = 1e-8
) -> OptimizerState:
    """Self-normalized step: theta <- theta - eta / (sqrt(sum g^2) + eps) * grad."""
    grad = _require_finite(grad, "gradient", state.iteration + 1)
    accum = grad ** 2 if state.second_moment is None else state.second_moment + grad ** 2
    theta = state.theta - eta / (np.sqrt(accum) + epsilon) * grad
    return replace(
        state, theta=theta, fast=theta, iteration=state.iteration + 1, second_moment=accum
    )


def adam_step(
    state: OptimizerState,
    grad: np.ndarray,
    eta: float,
    beta1: float = 0.9,
    beta2: float = 0.999,
    epsilon: float = 1e-8,
) -> OptimizerState:
    """EMA-moment step without bias correction:
    m <- b1 m + (1-b1) g;  v <- b2 v + (1-b2) g^2;  theta <- theta - eta m / (sqrt(v) + eps).
    """
    grad = _require_finite(grad, "gradient", state.iteration + 1)
    m = np.zeros_like(grad) if state.first_moment is None else state.first_moment
    v = np.zeros_like(grad) if state.second_moment is None else state.second_moment
    m = beta1 * m + (1.0 - beta1) * grad
    v = beta2 * v + (1.0 - beta2) * grad ** 2
    theta = state.theta - eta * m / (np.sqrt(v) + epsilon)
    return replace(
        state,
        theta=theta,
        fast=theta,
        iteration=state.iteration + 1,
        first_moment=m,
        second_moment=v,
    )


def natural_gradient_update(
    theta: np.ndarray,
    grad: np.ndarray,
    metric: MetricTensor,
    eta: float,
    delta: float | None = None,
    cutoff: float = DEFAULT_CUTOFF,
) -> np.ndarray:
    """theta - eta * pinv(F + delta I) grad."""
    inverse = damped_pseudo_inverse(metric, delta=delta, cutoff=cutoff)
    return theta - eta * (inverse @ grad)


def qng_step(
    state: OptimizerState,
    cf: CostFunction,
    eta: float,
    delta: float = DEFAULT_DAMPING,
    cutoff: float = DEFAULT_CUTOFF,
) -> OptimizerState:
    """Natural-gradient step with the Fubini-Study metric at the current point."""
    grad = parameter_shift_gradient(cf, state.theta)
    grad = _require_finite(grad, "gradient", state.iteration + 1)
    metric = fubini_study_metric(cf.circuit, state.theta, cf.input_state, damping=delta)
    theta = natural_gradient_update(state.theta, grad, metric, eta, delta, cutoff)
    theta = _require_finite(theta, "parameters", state.iteration + 1)
    return replace(state, theta=theta, fast=theta, iteration=state.iteration + 1)


# ---------------------------------------------------------------------------
# warm start


@dataclass(frozen=True)
class WarmStartResult:
    theta_warm: np.ndarray
    gradients: tuple[np.ndarray, ...]   # raw grad(v_{k-1}) draws, in order
    rates: tuple[float, ...]
    max_grad_norm: float


def _warm_start(
    theta_prev: np.ndarray,
    strategy: str,
    rates: Sequence[float],
    gradient_source: GradientSource,
    beta: float,
    iteration: int,
) -> WarmStartResult:
    theta_prev = np.asarray(theta_prev, dtype=float)
    grads: list[np.ndarray] = []
    if strategy == "averaged-at-theta":
        accum = np.zeros_like(theta_prev)
        for rate in rates:
            g = _require_finite(gradient_source(theta_prev), "warm-start gradient", iteration)
            grads.append(g)
            accum += rate * g
        theta_warm = theta_prev - accum / len(rates)
    elif strategy in ("inner-sgd", "ema"):
        v = theta_prev.copy()
        steps: list[np.ndarray] = []
        for rate in rates:
            g = _require_finite(gradient_source(v), "warm-start gradient", iteration)
            grads.append(g)
            step = -rate * g
            steps.append(step)
            v = v + step
        if strategy == "inner-sgd":
            theta_warm = v
        else:
            K = len(rates)
            weights = (1.0 - beta) * beta ** (K - 1 - np.arange(K))
            theta_warm = theta_prev + sum(w * s for w, s in zip(weights, steps))
    else:
        raise UsageError(f"unknown warm-start strategy {strategy!r}")
    norms = [float(np.linalg.norm(g)) for g in grads]
    return WarmStartResult(theta_warm, tuple(grads), tuple(rates), max(norms))


def warm_start(
    theta_prev,
    strategy: str,
    K: int,
    mu: float,
    gradient_source: GradientSource,
    beta: float = 0.9,
) -> np.ndarray:
    """Re-initialization point near theta_prev, built from K sampled gradients.

    inner-sgd runs K consecutive SGD steps and returns v_K; averaged-at-theta
    averages K gradients all evaluated at theta_prev; ema reweights the
    inner-sgd steps by an exponential moving average with mixing ``beta``.
    """
    if K < 1:
        raise UsageError("K must be >= 1")
    result = _warm_start(
        np.asarray(theta_prev, dtype=float), strategy, [mu] * K, gradient_source, beta, 0
    )
    return result.theta_warm


# ---------------------------------------------------------------------------
# LAWS and generalized warm-start SGD


def _vqe_sources(cf: CostFunction, config: OptimizerConfig):
    gradient = lambda theta: parameter_shift_gradient(cf, theta)
    metric = lambda theta: fubini_study_metric(cf.circuit, theta, cf.input_state, damping=config.delta)
    objective = lambda theta: cost(cf, theta)
    return gradient, metric, objective


def laws_step(
    state: OptimizerState,
    cf: CostFunction | None,
    config: OptimizerConfig,
    gradient_source: GradientSource | None = None,
    metric_source: MetricSource | None = None,
    cost_fn: Callable[[np.ndarray], float] | None = None,
) -> tuple[OptimizerState, TraceRecord]:
    """One outer LAWS iteration.

    K warm-start steps produce theta_warm, the metric is evaluated there, and
    the accumulated displacement g_t = theta_warm - theta_{t-1} is pulled back
    through the damped inverse metric:

        theta_t = theta_warm - lambda_t * pinv(F_t + delta I) g_t

    For data-free costs the gradient source is the exact analytic gradient;
    pass ``gradient_source`` to use mini-batch draws instead.
    """
    start = time.perf_counter()
    if cf is not None:
        default_grad, default_metric, default_cost = _vqe_sources(cf, config)
        gradient_source = gradient_source or default_grad
        metric_source = metric_source or default_metric
        cost_fn = cost_fn or default_cost
    if gradient_source is None or metric_source is None or cost_fn is None:
        raise UsageError("laws_step needs a CostFunction or explicit sources")

    t = state.iteration + 1
    ws = _warm_start(
        state.theta,
        config.warm_start_strategy,
        _inner_rates(config, t),
        gradient_source,
        config.beta,
        t,
    )
    g_t = ws.theta_warm - state.theta
    metric = metric_source(ws.theta_warm)
    inverse = damped_pseudo_inverse(metric, delta=config.delta, cutoff=config.cutoff)
    theta = ws.theta_warm - config.lambda_t * (inverse @ g_t)
    theta = _require_finite(theta, "parameters", t)

    new_state = replace(state, theta=theta, fast=theta, iteration=t, inner_step=0)
    record = TraceRecord(
        iteration=t,
        cost=float(cost_fn(theta)),
        grad_norm=float(np.linalg.norm(g_t)),
        wall_ms=(time.perf_counter() - start) * 1e3,
    )
    return new_state, record


def _inner_optimizer_loop(
    theta_prev: np.ndarray,
    name: str,
    rates: Sequence[float],
    gradient_source: GradientSource,
    config: OptimizerConfig,
    iteration: int,
) -> tuple[np.ndarray, list[np.ndarray]]:
    inner = init_state(theta_prev)
    grads: list[np.ndarray] = []
    for rate in rates:
        g = _require_finite(gradient_source(inner.theta), "warm-start gradient", iteration)
        grads.append(g)
        if name == "sgd":
            inner = sgd_step(inner, g, rate)
        elif name == "adagrad":
            inner = adagrad_step(inner, g, rate, config.epsilon)
        elif name == "adam":
            inner = adam_step(inner, g, rate, config.beta1, config.beta2, config.epsilon)
        else:
            raise UsageError(f"inner optimizer must be one of {INNER_OPTIMIZERS}, got {name!r}")
    return inner.theta, grads


def wssgd_step(
    state: OptimizerState,
    cf: CostFunction | None,
    config: OptimizerConfig,
    warm_start_optimizer: str | None = None,
    gradient_source: GradientSource | None = None,
    metric_source: MetricSource | None = None,
    cost_fn: Callable[[np.ndarray], float] | None = None,
) -> tuple[OptimizerState, TraceRecord]:
    """One generalized warm-start iteration: K steps of the inner optimizer W,
    then theta_t = Delta_t theta_{t-1} + (1 - Delta_t) theta_warm with

        lookahead:  Delta_t = 1 - alpha
        fisher:     Delta_t = 1 - lambda_t pinv(F_t + delta I)   (matrix)
        adam-like:  Delta_t = 1 - lambda_t sqrt(sum_k grad_k^2)  (elementwise)

    so Delta_t = I leaves theta unchanged and Delta_t = 0 keeps the pure warm
    start.  The metric for the fisher variant is evaluated at theta_warm.
    """
    start = time.perf_counter()
    if cf is not None:
        default_grad, default_metric, default_cost = _vqe_sources(cf, config)
        gradient_source = gradient_source or default_grad
        metric_source = metric_source or default_metric
        cost_fn = cost_fn or default_cost
    if gradient_source is None or cost_fn is None:
        raise UsageError("wssgd_step needs a CostFunction or explicit sources")
    if config.delta_variant == "fisher" and metric_source is None:
        raise UsageError("fisher variant needs a metric source")

    t = state.iteration + 1
    inner_name = warm_start_optimizer or config.inner_optimizer
    theta_warm, grads = _inner_optimizer_loop(
        state.theta, inner_name, _inner_rates(config, t), gradient_source, config, t
    )
    displacement = theta_warm - state.theta

    if config.delta_variant == "lookahead":
        theta = state.theta + config.alpha * displacement
    elif config.delta_variant == "fisher":
        inverse = damped_pseudo_inverse(metric_source(theta_warm), delta=config.delta, cutoff=config.cutoff)
        theta = state.theta + config.lambda_t * (inverse @ displacement)
    else:  # adam-like
        scale = np.sqrt(sum(g ** 2 for g in grads))
        theta = state.theta + config.lambda_t * scale * displacement
    theta = _require_finite(theta, "parameters", t)

    new_state = replace(state, theta=theta, fast=theta, iteration=t, inner_step=0)
    record = TraceRecord(
        iteration=t,
        cost=float(cost_fn(theta)),
        grad_norm=float(np.linalg.norm(displacement)),
        wall_ms=(time.perf_counter() - start) * 1e3,
    )
    return new_state, record


# ---------------------------------------------------------------------------
# uniform stepping interface


@dataclass(frozen=True, eq=False)
class Objective:
    """Callable bundle an optimizer driver needs; gradient may be stochastic
    (any randomness is owned by the callable, keeping steps deterministic)."""

    n_params: int
    cost: Callable[[np.ndarray], float]
    gradient: GradientSource
    metric: MetricSource | None = None
    extra_metrics: Callable[[np.ndarray], dict[str, float]] | None = None


OPTIMIZER_NAMES = ("sgd", "adagrad", "adam", "qng", "lookahead", "laws", "wssgd")

StepDriver = Callable[[OptimizerState, "Objective"], tuple[OptimizerState, TraceRecord]]


def make_step_driver(name: str, config: OptimizerConfig) -> StepDriver:
    """One-step driver for a registered optimizer name."""
    if name not in OPTIMIZER_NAMES:
        raise ConfigError(f"unknown optimizer {name!r}; registered: {', '.join(OPTIMIZER_NAMES)}")

    def first_order(state: OptimizerState, objective: Objective, update) -> tuple[OptimizerState, TraceRecord]:
        start = time.perf_counter()
        grad = objective.gradient(state.theta)
        new_state = update(state, grad)
        record = TraceRecord(
            iteration=new_state.iteration,
            cost=float(objective.cost(new_state.theta)),
            grad_norm=float(np.linalg.norm(grad)),
            wall_ms=(time.perf_counter() - start) * 1e3,
        )
        return new_state, record

    def driver(state: OptimizerState, objective: Objective) -> tuple[OptimizerState, TraceRecord]:
        if name == "sgd":
            new_state, record = first_order(state, objective, lambda s, g: sgd_step(s, g, config.eta))
        elif name == "adagrad":
            new_state, record = first_order(
                state, objective, lambda s, g: adagrad_step(s, g, config.eta, config.epsilon)
            )
        elif name == "adam":
            new_state, record = first_order(
                state,
                objective,
                lambda s, g: adam_step(s, g, config.eta, config.beta1, config.beta2, config.epsilon),
            )
        elif name == "qng":
            if objective.metric is None:
                raise UsageError("qng needs an objective with a metric")

            def qng_update(s: OptimizerState, g: np.ndarray) -> OptimizerState:
                g = _require_finite(g, "gradient", s.iteration + 1)
                theta = natural_gradient_update(
                    s.theta, g, objective.metric(s.theta), config.eta, config.delta, config.cutoff
                )
                theta = _require_finite(theta, "parameters", s.iteration + 1)
                return replace(s, theta=theta, fast=theta, iteration=s.iteration + 1)

            new_state, record = first_order(state, objective, qng_update)
        elif name == "laws":
            new_state, record = laws_step(
                state,
                None,
                config,
                gradient_source=objective.gradient,
                metric_source=objective.metric,
                cost_fn=objective.cost,
            )
        else:  # lookahead and wssgd
            effective = replace(config, delta_variant="lookahead") if name == "lookahead" else config
            new_state, record = wssgd_step(
                state,
                None,
                effective,
                gradient_source=objective.gradient,
                metric_source=objective.metric,
                cost_fn=objective.cost,
            )
        if objective.extra_metrics is not None:
            record = replace(record, extra=objective.extra_metrics(new_state.theta))
        return new_state, record

    return driver
