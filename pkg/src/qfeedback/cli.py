"""Batch front-end: run scenarios, sweep parameters, validate configs, and
summarize ledgers.

Exit codes: 0 success, 1 validation failure, 2 numerical failure, 3 I/O.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from importlib import resources
from pathlib import Path

from .config import ScenarioConfig, parse_config, with_value
from .controller import run_controller_cycle
from .errors import (
    BranchMismatchError,
    ConfigError,
    DegenerateStateError,
    DimensionMismatchError,
    DomainError,
    InvalidModelError,
    InvalidStateError,
    IoError,
    NoConvergenceError,
    NonPositiveTemperatureError,
    NonUnitaryBlockError,
    NotADistributionError,
    NotHermitianError,
    PlanMismatchError,
    UnknownParameterError,
)
from .feedback import run_continuous, run_cycle, run_transform
from .ledger import (
    LedgerRow,
    emit,
    parse_csv,
    row_from_controller,
    row_from_continuous,
    row_from_cycle,
    row_from_transform,
)
from .measurement import validate

VALIDATION_ERRORS = (
    ConfigError,
    InvalidModelError,
    UnknownParameterError,
    NonPositiveTemperatureError,
    DimensionMismatchError,
    NotADistributionError,
    NotHermitianError,
)
NUMERICAL_ERRORS = (
    NoConvergenceError,
    DomainError,
    PlanMismatchError,
    BranchMismatchError,
    DegenerateStateError,
    NonUnitaryBlockError,
    InvalidStateError,
)

SECOND_LAW_TOL = -1e-9


def load_config(name: str) -> ScenarioConfig:
    """Read a scenario from a file path or, failing that, a packaged preset
    name (``szilard`` resolves to the shipped ``szilard.yaml``)."""
    path = Path(name)
    if path.is_file():
        try:
            text = path.read_text()
        except OSError as exc:
            raise IoError(f"cannot read {name}: {exc}") from exc
        return parse_config(text, source=name)
    stem = name if name.endswith(".yaml") else f"{name}.yaml"
    preset = resources.files("qfeedback").joinpath("presets", stem)
    if preset.is_file():
        return parse_config(preset.read_text(), source=f"preset {name}")
    raise IoError(f"no such config file or preset: {name}")


def _outcome_entry(outcome) -> dict:
    return {
        "n": outcome.n,
        "probability": outcome.probability,
        "entropy": outcome.entropy,
        "energy": outcome.energy,
        "delta_e": outcome.delta_e,
        "work": outcome.work,
    }


def run_scenario(config: ScenarioConfig) -> tuple[LedgerRow, dict]:
    """Dispatch one scenario; returns its ledger row and a detail tree."""
    h = config.hamiltonian
    t = config.temperature
    if config.mode == "cycle":
        ledger = run_cycle(
            h, t, config.model, k=config.k,
            lambda_floor=config.lambda_floor, p_floor=config.p_floor,
        )
        row = row_from_cycle(config, ledger)
        detail = {
            "outcomes": [_outcome_entry(o) for o in ledger.outcomes],
            "heat_from_bath": ledger.heat_from_bath,
            "dropped_outcomes": ledger.dropped_outcomes,
        }
    elif config.mode == "transform":
        result = run_transform(
            h, config.h2, t, config.model, k=config.k,
            lambda_floor=config.lambda_floor, p_floor=config.p_floor,
        )
        row = row_from_transform(config, result)
        detail = {
            "outcomes": [_outcome_entry(o) for o in result.ledger.outcomes],
            "free_energy_initial": result.free_energy_initial,
            "free_energy_final": result.free_energy_final,
            "heat_from_bath": result.ledger.heat_from_bath,
        }
    elif config.mode == "continuous":
        result = run_continuous(
            h, t, config.model.generator, config.model.strength, config.steps,
            k=config.k, lambda_floor=config.lambda_floor, p_floor=config.p_floor,
        )
        row = row_from_continuous(config, result)
        detail = {
            "epsilon": result.epsilon,
            "n_steps": result.n_steps,
            "work_per_step": result.per_cycle.work_fb,
            "delta_s_meas_per_step": result.delta_s_meas_per_step,
            "scaling_ratio": result.scaling_ratio,
        }
    else:
        result = run_controller_cycle(
            h, t, config.model, k=config.k,
            lambda_floor=config.lambda_floor, p_floor=config.p_floor,
        )
        row = row_from_controller(config, result)
        detail = {
            "branch_probabilities": list(result.probabilities),
            "branch_entropies": list(result.branch_entropies),
            "bath_entropy_increase": result.bath_entropy_increase,
            "system_closure": result.system_closure,
            "controller_closure": result.controller_closure,
            "second_law_verdict": result.report.verdict,
        }
    return row, detail


def _emit_rows(rows, args) -> None:
    if args.output:
        emit(rows, args.format, args.output)
    else:
        emit(rows, args.format, sys.stdout)


def cmd_run(args) -> int:
    config = load_config(args.config)
    try:
        row, detail = run_scenario(config)
    except NUMERICAL_ERRORS as exc:
        raise type(exc)(f"{config.scenario_id}: {exc}") from exc
    if args.detail:
        if args.output:
            emit([row], args.format, args.output)
        payload = {"row": row.__dict__, "detail": detail}
        json.dump(payload, sys.stdout, indent=2, default=float)
        sys.stdout.write("\n")
    else:
        _emit_rows([row], args)
    return 0


def cmd_sweep(args) -> int:
    config = load_config(args.config)
    values = [float(v) for v in args.values.split(",") if v.strip() != ""]
    variants = [with_value(config, args.param, v) for v in values]
    with ThreadPoolExecutor(max_workers=min(8, max(1, len(variants)))) as pool:
        results = list(pool.map(run_scenario, variants))
    rows = [row for row, _ in results]
    _emit_rows(rows, args)
    return 0


def cmd_validate(args) -> int:
    try:
        config = load_config(args.config)
    except ConfigError as exc:
        print(f"invalid: {exc}", file=sys.stderr)
        return 1
    report = validate(config.model)
    print(report.describe())
    if not report.ok:
        return 1
    print(f"config ok: {config.scenario_id} ({config.mode}, dim {config.dim})")
    return 0


def cmd_report(args) -> int:
    try:
        text = Path(args.ledger).read_text()
    except OSError as exc:
        raise IoError(f"cannot read {args.ledger}: {exc}") from exc
    rows = parse_csv(text)
    header = f"{'scenario':<40} {'mode':<11} {'work_fb':>14} {'dS_tot':>14}  verdict"
    print(header)
    print("-" * len(header))
    passes = 0
    for row in rows:
        ok = row.delta_S_tot >= SECOND_LAW_TOL
        passes += ok
        verdict = "PASS" if ok else "FAIL"
        if row.efficiency_flag:
            verdict += " (efficient)"
        print(
            f"{row.scenario_id:<40} {row.mode:<11} {row.work_fb:>14.6g} "
            f"{row.delta_S_tot:>14.6g}  {verdict}"
        )
    print("-" * len(header))
    print(f"{passes}/{len(rows)} rows satisfy the second-law ledger bound")
    return 0 if passes == len(rows) else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qfeedback",
        description="Feedback-control work extraction: scenario runner and ledger tools.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one scenario and emit its ledger row")
    p_run.add_argument("config", help="config file path or preset name")
    p_run.add_argument("--output", default=None, help="write ledger here instead of stdout")
    p_run.add_argument("--format", choices=("csv", "json"), default="csv")
    p_run.add_argument(
        "--detail", action="store_true",
        help="print a detailed JSON document (per-outcome data) to stdout",
    )
    p_run.set_defaults(func=cmd_run)

    p_sweep = sub.add_parser("sweep", help="run a scenario once per parameter value")
    p_sweep.add_argument("config", help="config file path or preset name")
    p_sweep.add_argument("--param", required=True, help="dotted config path, e.g. measurement.epsilon")
    p_sweep.add_argument("--values", required=True, help="comma-separated numbers")
    p_sweep.add_argument("--output", default=None)
    p_sweep.add_argument("--format", choices=("csv", "json"), default="csv")
    p_sweep.set_defaults(func=cmd_sweep)

    p_val = sub.add_parser("validate", help="check a config and its measurement model")
    p_val.add_argument("config")
    p_val.set_defaults(func=cmd_validate)

    p_rep = sub.add_parser("report", help="summarize a ledger CSV with second-law verdicts")
    p_rep.add_argument("ledger")
    p_rep.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except VALIDATION_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except NUMERICAL_ERRORS as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    except (IoError, OSError) as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
