"""Command-line pipeline: simulate, train, infer, coverage, ppc, validate.

One JSON run-configuration file drives every subcommand; flags override the
matching config values. Seeds always come from the config or a flag - never
from the clock - so identical invocations produce identical files.

Exit codes: 0 ok, 2 usage, 3 configuration, 4 backend, 5 numeric failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys

import numpy as np

from . import jsonio
from .core import DemandProfile, Schedule, ThetaVector
from .diagnostics import DEFAULT_LEVELS, corner_data, expected_coverage, ppc
from .errors import (
    BackendError,
    ConfigHashMismatch,
    CorruptFile,
    DimensionMismatch,
    Infeasible,
    InvalidFleet,
    LpNumericalFailure,
    NodeLimitExceeded,
    NonFiniteDensity,
    NonFiniteGradient,
    NonFiniteInput,
    NonFiniteLoss,
    RejectionRateTooHigh,
    SchemaMismatch,
    SolverTimeout,
    TooManyBinaries,
    UsageError,
)
from .flows import load_checkpoint, save_checkpoint
from .milp import (
    available_power_cap,
    commitment_indicators,
    make_backend,
    validate_schedule,
)
from .npe import TrainConfig, build_context, load_training_data, train
from .simfarm import Scenario, generate_dataset, read_dataset

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_CONFIG = 3
EXIT_BACKEND = 4
EXIT_NUMERIC = 5

_CONFIG_ERRORS = (
    SchemaMismatch, ConfigHashMismatch, CorruptFile, InvalidFleet,
    DimensionMismatch, FileNotFoundError, json.JSONDecodeError, KeyError,
    ValueError,
)
_BACKEND_ERRORS = (BackendError, SolverTimeout, Infeasible, TooManyBinaries,
                   NodeLimitExceeded)
_NUMERIC_ERRORS = (NonFiniteInput, NonFiniteGradient, NonFiniteLoss,
                   NonFiniteDensity, LpNumericalFailure, RejectionRateTooHigh)


def _load_config(path: str) -> dict:
    cfg = jsonio.load(path)
    if cfg.get("schema_version") != 1:
        raise SchemaMismatch(
            f"unsupported run-config schema {cfg.get('schema_version')!r}"
        )
    if "seed" not in cfg:
        raise SchemaMismatch("run config must pin an explicit seed")
    return cfg


def _seed(args, cfg) -> int:
    return args.seed if args.seed is not None else int(cfg["seed"])


def _load_obs(path: str) -> dict:
    obs = jsonio.load(path)
    if "demand" not in obs:
        raise SchemaMismatch(f"{path}: observation file needs a 'demand' field")
    return obs


def cmd_simulate(args) -> int:
    cfg = _load_config(args.config)
    scenario = Scenario.from_run_config(cfg)
    generate_dataset(
        scenario, n=args.n, seed=_seed(args, cfg),
        backend_config=cfg["backend"], out_path=args.out,
        workers=args.workers,
    )
    print(f"wrote {args.n} records to {args.out}")
    return EXIT_OK


def cmd_train(args) -> int:
    cfg = _load_config(args.config)
    scenario = Scenario.from_run_config(cfg)
    train_cfg = TrainConfig.from_jsonable(cfg.get("train", {}), seed=int(cfg["seed"]))
    overrides = {}
    if args.flow:
        overrides["flow_kind"] = args.flow
    if args.epochs is not None:
        overrides["epochs"] = args.epochs
    if args.batch is not None:
        overrides["batch_size"] = args.batch
    if args.lr is not None:
        overrides["learning_rate"] = args.lr
    if args.seed is not None:
        overrides["seed"] = args.seed
    if overrides:
        from dataclasses import replace

        train_cfg = replace(train_cfg, **overrides)

    train_data = load_training_data(args.train, scenario)
    val_data = load_training_data(args.val, scenario)
    model, curve = train(train_data, val_data, train_cfg)
    save_checkpoint(args.out, model)
    curve_path = args.curve or (args.out + ".curve.csv")
    curve.to_csv(curve_path)
    print(
        f"checkpoint {args.out} (selected epoch {curve.selected_epoch}, "
        f"val NLL {min(curve.val_nll):.4f}); curve {curve_path}"
    )
    return EXIT_OK


def cmd_infer(args) -> int:
    if args.samples < 1:
        raise UsageError("--samples must be >= 1")
    model = load_checkpoint(args.model)
    obs = _load_obs(args.obs)
    if "g" not in obs:
        raise SchemaMismatch(f"{args.obs}: inference needs an observed 'g' matrix")
    context = build_context(
        np.asarray(obs["g"], float), np.asarray(obs["demand"], float)
    )
    rng = np.random.default_rng(args.seed if args.seed is not None else 0)
    samples = model.sample(context, args.samples, rng)
    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"theta_{i}" for i in range(samples.shape[1])])
        for row in samples:
            writer.writerow([f"{x:.17g}" for x in row])
    if args.corner_out:
        theta_star = obs.get("theta_star")
        corner = corner_data(samples, theta_star=theta_star, bins=args.bins)
        jsonio.save(args.corner_out, corner.to_jsonable())
    print(f"wrote {samples.shape[0]} posterior samples to {args.out}")
    return EXIT_OK


def cmd_coverage(args) -> int:
    if args.samples < 1:
        raise UsageError("--samples must be >= 1")
    cfg = _load_config(args.config)
    scenario = Scenario.from_run_config(cfg)
    model = load_checkpoint(args.model)
    thetas, contexts = [], []
    for rec in read_dataset(args.test, scenario):
        thetas.append(rec.theta)
        contexts.append(build_context(rec.g, rec.demand))
    levels = np.linspace(0.05, 0.95, args.levels) if args.levels else DEFAULT_LEVELS
    rng = np.random.default_rng(_seed(args, cfg))
    curve = expected_coverage(
        model, np.asarray(thetas), np.asarray(contexts),
        levels=levels, M=args.samples, rng=rng,
    )
    curve.to_csv(args.out)
    print(f"coverage over {curve.n_pairs} pairs -> {args.out}")
    return EXIT_OK


def cmd_ppc(args) -> int:
    if args.samples < 1:
        raise UsageError("--samples must be >= 1")
    cfg = _load_config(args.config)
    scenario = Scenario.from_run_config(cfg)
    backend_cfg = dict(cfg["backend"])
    if args.backend:
        backend_cfg["kind"] = args.backend
    backend = make_backend(backend_cfg)
    model = load_checkpoint(args.model)
    obs = _load_obs(args.obs)
    demand = DemandProfile(np.asarray(obs["demand"], float))
    theta_star = (
        ThetaVector(np.asarray(obs["theta_star"], float))
        if obs.get("theta_star") is not None else None
    )
    g_star = np.asarray(obs["g"], float) if "g" in obs else None
    rng = np.random.default_rng(_seed(args, cfg))
    bands = ppc(
        model, scenario.fleet, theta_star, demand, args.samples, backend,
        rng, prior=scenario.theta_prior, g_star=g_star, workers=args.workers,
    )
    bands.to_csv(args.out)
    print(
        f"ppc bands from {bands.n_samples} samples "
        f"({bands.n_rejected} rejected) -> {args.out}"
    )
    return EXIT_OK


def cmd_validate(args) -> int:
    cfg = _load_config(args.config)
    scenario = Scenario.from_run_config(cfg)
    n_bad = 0
    n_records = 0
    for rec in read_dataset(args.dataset, scenario):
        n_records += 1
        y, z = commitment_indicators(
            rec.v, [u.init_committed for u in scenario.fleet.units]
        )
        g_bar = available_power_cap(scenario.fleet, rec.g, rec.v, y, z)
        schedule = Schedule(
            g=rec.g, g_bar=g_bar, v=rec.v, y=y, z=z, objective_value=rec.objective
        )
        violations = validate_schedule(
            scenario.fleet, ThetaVector(rec.theta),
            DemandProfile(rec.demand), schedule,
        )
        if violations:
            n_bad += 1
            print(
                f"record {rec.seed_index}: {len(violations)} violations, "
                f"first {violations[0]}", file=sys.stderr,
            )
    if n_bad:
        print(f"{n_bad}/{n_records} records invalid", file=sys.stderr)
        return EXIT_NUMERIC
    print(f"all {n_records} records valid")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ucinfer",
        description="Unit-commitment simulation and cost-posterior estimation",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="generate a simulated dataset")
    p.add_argument("--config", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", required=True)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("train", help="fit a flow on simulated datasets")
    p.add_argument("--config", required=True)
    p.add_argument("--train", required=True)
    p.add_argument("--val", required=True)
    p.add_argument("--flow", choices=["maf", "nsf"], default=None)
    p.add_argument("--epochs", type=int, default=None)
    p.add_argument("--batch", type=int, default=None)
    p.add_argument("--lr", type=float, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", required=True)
    p.add_argument("--curve", default=None)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("infer", help="sample the posterior for one observation")
    p.add_argument("--model", required=True)
    p.add_argument("--obs", required=True)
    p.add_argument("--samples", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--corner-out", default=None)
    p.add_argument("--bins", type=int, default=30)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_infer)

    p = sub.add_parser("coverage", help="expected-coverage calibration curve")
    p.add_argument("--config", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--test", required=True)
    p.add_argument("--levels", type=int, default=None)
    p.add_argument("--samples", type=int, default=1024)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_coverage)

    p = sub.add_parser("ppc", help="posterior predictive dispatch bands")
    p.add_argument("--config", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--obs", required=True)
    p.add_argument("--samples", type=int, required=True)
    p.add_argument("--backend", choices=["embedded", "highs", "external"],
                   default=None)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_ppc)

    p = sub.add_parser("validate", help="re-check every schedule in a dataset")
    p.add_argument("--config", required=True)
    p.add_argument("--dataset", required=True)
    p.set_defaults(func=cmd_validate)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        _emit_error(exc)
        return EXIT_USAGE
    except _NUMERIC_ERRORS as exc:
        _emit_error(exc)
        return EXIT_NUMERIC
    except _BACKEND_ERRORS as exc:
        _emit_error(exc)
        return EXIT_BACKEND
    except _CONFIG_ERRORS as exc:
        _emit_error(exc)
        return EXIT_CONFIG


def _emit_error(exc) -> None:
    line = json.dumps({"error": type(exc).__name__, "message": str(exc)})
    print(line, file=sys.stderr)


if __name__ == "__main__":
    sys.exit(main())
