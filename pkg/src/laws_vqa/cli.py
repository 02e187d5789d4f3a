"""Command-line entry point.

Subcommands: ``run``, ``compare``, ``validate``, ``bp-scan``.  Every run
writes a trace CSV, a JSON metadata sidecar and (unless --no-plots) a PNG
figure into the output directory.  Exit codes: 0 success, 1 numeric abort
(partial trace still written), 2 configuration error, 3 I/O error.

``compare`` fans out (optimizer x seed) cells; LAWS_VQA_THREADS caps the
worker count (default 1, sequential).
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .circuits import load_circuit
from .config import RunConfig, parse_config
from .errors import CapabilityError, ConfigError, IngestionError, NumericError, UsageError
from .experiments import (
    ExperimentResult,
    run_bp_scan,
    run_h2_vqe,
    run_iris_classifier,
    run_random_pqc,
)
from .reporting import write_bp_csv, write_metadata, write_summary_csv, write_trace_csv


def _add_override_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", metavar="FILE", help="sectioned key-value config file")
    exp = parser.add_argument_group("experiment overrides")
    exp.add_argument("--experiment", choices=("random-pqc", "h2-vqe", "iris", "bp-scan"))
    exp.add_argument("--seed", type=int)
    exp.add_argument("--iterations", type=int)
    exp.add_argument("--circuit-seed", dest="circuit_seed", type=int)
    exp.add_argument("--circuit-file", dest="circuit_file")
    exp.add_argument("--hamiltonian-file", dest="hamiltonian_file")
    exp.add_argument("--include-singles", dest="include_singles", action="store_const", const=True)
    exp.add_argument("--iris-file", dest="iris_file")
    exp.add_argument("--train-fraction", dest="train_fraction", type=float)
    exp.add_argument("--batch-size", dest="batch_size", type=int)
    exp.add_argument("--n-layers", dest="n_layers", type=int)
    exp.add_argument("--qubits", help="comma list for bp-scan, e.g. 2,4,6")
    exp.add_argument("--samples", type=int)
    exp.add_argument("--depth-factor", dest="depth_factor", type=int)
    exp.add_argument("--threshold", type=float, help="cost threshold for compare summaries")
    opt = parser.add_argument_group("optimizer overrides")
    opt.add_argument("--optimizer")
    opt.add_argument("--eta", type=float)
    opt.add_argument("--mu", type=float)
    opt.add_argument("--warm-start-steps", dest="warm_start_steps", type=int)
    opt.add_argument("--alpha", type=float)
    opt.add_argument("--beta1", type=float)
    opt.add_argument("--beta2", type=float)
    opt.add_argument("--beta", type=float)
    opt.add_argument("--epsilon", type=float)
    opt.add_argument("--delta", type=float)
    opt.add_argument("--cutoff", type=float)
    opt.add_argument("--c0", type=float)
    opt.add_argument("--schedule", choices=("constant", "theorem1"))
    opt.add_argument("--warm-start-strategy", dest="warm_start_strategy",
                     choices=("inner-sgd", "averaged-at-theta", "ema"))
    opt.add_argument("--delta-variant", dest="delta_variant",
                     choices=("lookahead", "fisher", "adam-like"))
    opt.add_argument("--inner-optimizer", dest="inner_optimizer", choices=("sgd", "adagrad", "adam"))
    opt.add_argument("--lambda-mode", dest="lambda_mode", choices=("eta-over-k", "eta"))
    out = parser.add_argument_group("output")
    out.add_argument("--output-dir", dest="output_dir")
    out.add_argument("--plots", dest="plots", action="store_const", const=True)
    out.add_argument("--no-plots", dest="plots", action="store_const", const=False)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="laws-vqa",
        description="Warm-start and natural-gradient optimization experiments on a statevector simulator.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one experiment and write its trace")
    _add_override_flags(p_run)
    p_run.add_argument("--validate", action="store_true", help="resolve and check the config, do not run")

    p_cmp = sub.add_parser("compare", help="run an optimizer x seed grid and summarize")
    _add_override_flags(p_cmp)
    p_cmp.add_argument("--optimizers", required=True, help="comma list, e.g. sgd,qng,laws")
    p_cmp.add_argument("--seeds", required=True, help="comma list or range, e.g. 1,2,3 or 1..20")

    p_val = sub.add_parser("validate", help="resolve and check a config without executing")
    _add_override_flags(p_val)

    p_bp = sub.add_parser("bp-scan", help="gradient-variance scan over qubit counts")
    _add_override_flags(p_bp)

    return parser


def _overrides_from_args(args: argparse.Namespace) -> dict:
    skip = {"command", "config", "validate", "optimizers", "seeds"}
    return {k: v for k, v in vars(args).items() if k not in skip}


def _resolve(args: argparse.Namespace) -> RunConfig:
    return parse_config(args.config, _overrides_from_args(args))


def _parse_seeds(text: str) -> list[int]:
    text = text.strip()
    if ".." in text:
        lo, hi = text.split("..", 1)
        return list(range(int(lo), int(hi) + 1))
    return [int(tok) for tok in text.split(",") if tok]


def execute_experiment(config: RunConfig, optimizer: str | None = None, seed: int | None = None):
    """Run the configured experiment; returns an ExperimentResult or, for
    bp-scan, the variance table rows."""
    optimizer = optimizer if optimizer is not None else config.optimizer
    seed = seed if seed is not None else config.seed
    iterations = config.resolved_iterations
    oc = config.optimizer_config
    if config.experiment == "random-pqc":
        circuit = load_circuit(config.circuit_file) if config.circuit_file else None
        return run_random_pqc(optimizer, oc, seed, iterations,
                              circuit_seed=config.circuit_seed, circuit=circuit)
    if config.experiment == "h2-vqe":
        return run_h2_vqe(optimizer, oc, seed, iterations,
                          hamiltonian_path=config.hamiltonian_file,
                          include_singles=config.include_singles)
    if config.experiment == "iris":
        return run_iris_classifier(optimizer, oc, seed, iterations,
                                   data_path=config.iris_file,
                                   train_fraction=config.train_fraction,
                                   batch_size=config.batch_size,
                                   n_layers=config.n_layers)
    if config.experiment == "bp-scan":
        return run_bp_scan(seed, config.qubits, config.samples, config.depth_factor)
    raise ConfigError(f"unknown experiment {config.experiment!r}")


def _write_run_outputs(config: RunConfig, result, optimizer: str, seed: int) -> Path:
    out = Path(config.output_dir)
    if config.experiment == "bp-scan":
        base = out / f"bp_scan_seed{seed}"
        write_bp_csv(result, base.with_suffix(".csv"))
        if config.plots:
            from .plotting import plot_bp_scan

            plot_bp_scan(result, base.with_suffix(".png"), title=f"bp-scan seed {seed}")
        return base.with_suffix(".csv")
    base = out / f"{config.experiment}_{optimizer}_seed{seed}"
    write_trace_csv(result, base.with_suffix(".csv"))
    write_metadata(result, base.with_suffix(".json"))
    if config.plots:
        from .plotting import plot_trace

        plot_trace(result, base.with_suffix(".png"), title=f"{config.experiment} / {optimizer} / seed {seed}")
    return base.with_suffix(".csv")


def cmd_run(config: RunConfig) -> int:
    result = execute_experiment(config)
    path = _write_run_outputs(config, result, config.optimizer, config.seed)
    if isinstance(result, ExperimentResult) and result.aborted:
        print(f"numeric abort; partial trace written to {path}", file=sys.stderr)
        return 1
    print(f"wrote {path}")
    return 0


def _compare_cell(payload: tuple[dict, str, int]):
    snapshot, optimizer, seed = payload
    config = _config_from_snapshot(snapshot)
    result = execute_experiment(config, optimizer=optimizer, seed=seed)
    return optimizer, seed, result


def _config_from_snapshot(snapshot: dict) -> RunConfig:
    from .optimizers import OptimizerConfig

    payload = dict(snapshot)
    payload["optimizer_config"] = OptimizerConfig(**payload["optimizer_config"])
    payload["qubits"] = tuple(payload["qubits"])
    return RunConfig(**payload)


def cmd_compare(config: RunConfig, optimizers: list[str], seeds: list[int]) -> int:
    if config.experiment == "bp-scan":
        raise ConfigError("compare applies to optimizer experiments, not bp-scan")
    if len(optimizers) < 2:
        raise ConfigError("compare needs at least two optimizers")
    for name in optimizers:
        parse_config(None, {"optimizer": name})  # name validation with the registered list
    cells = [(config.snapshot(), opt, seed) for opt in optimizers for seed in seeds]
    workers = int(os.environ.get("LAWS_VQA_THREADS", "1") or "1")
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(_compare_cell, cells))
    else:
        outcomes = [_compare_cell(cell) for cell in cells]

    results = {(opt, seed): res for opt, seed, res in outcomes}
    summary = []
    aborted = False
    for opt, seed, result in outcomes:  # one summary row per requested cell
        _write_run_outputs(config, result, opt, seed)
        aborted = aborted or result.aborted
        reached = None
        if config.threshold is not None:
            for record in result.trace:
                if record.cost <= config.threshold:
                    reached = record.iteration
                    break
        summary.append(
            {"optimizer": opt, "seed": seed, "final_cost": result.trace[-1].cost,
             "iters_to_threshold": reached}
        )
    out = Path(config.output_dir)
    summary_path = write_summary_csv(summary, out / f"{config.experiment}_summary.csv")
    if config.plots:
        from .plotting import plot_compare

        plot_compare(results, out / f"{config.experiment}_compare.png", title=config.experiment)
    print(f"wrote {summary_path}")
    return 1 if aborted else 0


def cmd_validate(config: RunConfig) -> int:
    print(json.dumps(config.snapshot(), indent=2, sort_keys=True))
    print("config ok")
    return 0


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "bp-scan":
            args.experiment = "bp-scan"
        config = _resolve(args)
        if args.command == "validate" or getattr(args, "validate", False):
            return cmd_validate(config)
        if args.command == "compare":
            return cmd_compare(config, [t for t in args.optimizers.split(",") if t], _parse_seeds(args.seeds))
        return cmd_run(config)
    except (ConfigError, IngestionError, UsageError, CapabilityError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except NumericError as exc:
        print(f"numeric abort: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
