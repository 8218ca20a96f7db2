# File Path: services/cli/cli_service.py

"""
Command-line surface.

    mxqueue analyze  MODEL.json [--grid 0:10:21] [--level 0.95] [--format json|csv] [--output PATH]
    mxqueue table    varyK|varyRho [--normalization ...] [--curves PATH]
    mxqueue simulate MODEL.json [--n-customers N] [--seed S] [--ruin-u 0,1,2]
    mxqueue ordering --K 2 --weights 0.5,0.5 --lam 1 --mu 2 [--check-negative] [--empirical]
    mxqueue verify   [--no-simulation] [--inject-fault]

Exit codes: 0 ok, 1 domain error or failed check, 2 usage error.
JSON goes to --output or stdout; logs go to stderr.
"""

import argparse
import json
import logging
import re
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd
from pydantic import ValidationError

from common import config
from common.errors import MxQueueError
from common.events import (
    create_error_event,
    create_ordering_checked_event,
    create_scenario_analyzed_event,
    create_simulation_completed_event,
    create_table_computed_event,
    create_verification_completed_event,
)
from common.logging_config import setup_logging
from services.inversion import evaluate
from services.models import load_model, model_to_dict
from services.montecarlo import (
    SimConfig,
    ordering_check,
    simulate_delayed_ruin,
    simulate_ordinary_ruin,
    simulate_waiting,
    simulate_workload,
)
from services.queuerisk import DEFAULT_LEVEL, analyze

from .reference_tables import NORMALIZATIONS, TABLES, compute_table, max_reference_gap, qualitative_checks, table_curves
from .verification import run_verification

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_DOMAIN_ERROR = 1
EXIT_USAGE = 2

FLOAT_FORMAT = "%.10g"
DEFAULT_GRID = "0:10:21"

# Options whose value may start with a minus sign, e.g. --t-grid -2,-1,0,1,2
LIST_OPTIONS = ("--grid", "--lst-grid", "--t-grid", "--ruin-u", "--weights")
NEGATIVE_VALUE = re.compile(r"^-[\d.]")


# ============================================================================
# Argument helpers
# ============================================================================


def parse_grid(text: str) -> np.ndarray:
    """'0,1,2.5' is a list of points, 'min:max:count' an evenly spaced grid."""
    try:
        if ":" in text:
            lo, hi, count = text.split(":")
            n = int(count)
            if n < 1:
                raise ValueError
            return np.linspace(float(lo), float(hi), n)
        return np.array([float(x) for x in text.split(",") if x.strip()])
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid grid '{text}': use 'a,b,c' or 'min:max:count'")


def parse_floats(text: str) -> List[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid list '{text}'")


def _jsonable(obj: Any) -> Any:
    # numpy scalars/arrays and non-finite floats
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        value = float(obj)
        return value if np.isfinite(value) else None
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def write_json(payload: Dict, output: Optional[str]) -> None:
    text = json.dumps(_jsonable(payload), indent=2, allow_nan=False) + "\n"
    if output:
        Path(output).parent.mkdir(parents=True, exist_ok=True)
        Path(output).write_text(text, encoding="utf-8")
        logger.info(f"✅ Wrote {output}")
    else:
        sys.stdout.write(text)


def write_csv(frame: pd.DataFrame, output: Optional[str]) -> None:
    if output:
        Path(output).parent.mkdir(parents=True, exist_ok=True)
        frame.to_csv(output, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
        logger.info(f"✅ Wrote {output}")
    else:
        frame.to_csv(sys.stdout, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")


def _sim_config(args) -> SimConfig:
    overrides = {"seed": args.seed, "n_customers": args.n_customers}
    if getattr(args, "n_paths", None):
        overrides["n_paths"] = args.n_paths
    if getattr(args, "replications", None):
        overrides["replications"] = args.replications
    return config.get_sim_config(**overrides)


# ============================================================================
# Commands
# ============================================================================


def cmd_analyze(args) -> int:
    model = load_model(args.model)
    report = analyze(model, args.level)
    curves = pd.DataFrame(report.curves(args.grid))

    if args.format == "csv":
        write_csv(curves, args.output)
        return EXIT_OK

    summary = report.summary()
    summary["curves"] = {k: v.tolist() for k, v in report.curves(args.grid).items()}
    event = create_scenario_analyzed_event(model_to_dict(model), summary, args.level, args.grid.tolist())
    write_json(event, args.output)
    return EXIT_OK


def cmd_table(args) -> int:
    table = compute_table(args.which, args.normalization, args.level)
    gaps = max_reference_gap(table)
    for failure in qualitative_checks(table):
        logger.warning(f"⚠️ scenario ordering broken in row {failure['row']} ({failure['column']})")
    logger.info(f"Largest gap to published values: {gaps.max():.4f}")

    if args.curves:
        write_csv(table_curves(args.which, args.grid, args.normalization), args.curves)

    if args.format == "csv":
        write_csv(table, args.output)
    else:
        key = TABLES[args.which][0]
        ref_cols = [c for c in table.columns if c.startswith("ref_")]
        rows = table.drop(columns=ref_cols).to_dict(orient="records")
        reference = table[[key] + ref_cols].to_dict(orient="records")
        event = create_table_computed_event(args.which, args.normalization or config.TABLE_NORMALIZATION, rows, reference)
        write_json(event, args.output)
    return EXIT_OK


def cmd_simulate(args) -> int:
    model = load_model(args.model)
    cfg = _sim_config(args)
    report = analyze(model, args.level)
    grid = args.grid

    waiting = simulate_waiting(model, cfg, grid=grid, lst_grid=args.lst_grid)
    workload = simulate_workload(model, cfg, grid=grid)
    estimates: Dict[str, Any] = {"waiting": waiting.to_dict(), "workload": workload.to_dict()}
    analytic: Dict[str, Any] = {
        "meanW": report.meanW,
        "atomW": report.atomW,
        "P(W>u)": np.atleast_1d(evaluate(report.waiting_tail, grid)),
        "atomV": report.workload_tail.atom0,
        "P(V>v)": np.atleast_1d(evaluate(report.workload_tail, grid)),
        "meanCustomersPerBusyCycle": 1.0 / report.atomW,
        "meanIdle": report.mean_idle,
    }
    if len(args.lst_grid):
        analytic["E exp(-sW)"] = [float(np.real(report.waiting_lst(s))) for s in args.lst_grid]

    if args.ruin_u:
        estimates["ordinaryRuin"] = [simulate_ordinary_ruin(model, cfg, u).to_dict() for u in args.ruin_u]
        estimates["delayedRuin"] = [simulate_delayed_ruin(model, cfg, u).to_dict() for u in args.ruin_u]
        analytic["Psi0(u)"] = np.atleast_1d(evaluate(report.ordinary_ruin, args.ruin_u))
        analytic["Psi(u)"] = np.atleast_1d(evaluate(report.delayed_ruin, args.ruin_u))

    event = create_simulation_completed_event(model_to_dict(model), cfg.model_dump(), estimates, analytic)
    write_json(event, args.output)
    return EXIT_OK


def cmd_ordering(args) -> int:
    if len(args.weights) != args.K:
        raise argparse.ArgumentTypeError(f"expected {args.K} weights, got {len(args.weights)}")
    cfg = _sim_config(args) if args.empirical else None
    report = ordering_check(
        args.K,
        args.weights,
        args.lam,
        args.mu,
        cfg=cfg,
        t_grid=args.t_grid,
        check_negative=True if args.check_negative else None,
        raise_on_violation=False,
    )
    event = create_ordering_checked_event(args.K, report.weights, report.symmetric, report.exact_dict(), report.empirical)
    write_json(event, args.output)
    if not report.passed:
        logger.error(f"❌ {len(report.violations)} ordering violations")
        return EXIT_DOMAIN_ERROR
    return EXIT_OK


def cmd_verify(args) -> int:
    sim_cfg = None if args.no_simulation else _sim_config(args)
    passed, checks = run_verification(sim_cfg, inject_fault=args.inject_fault, normalization=args.normalization)
    write_json(create_verification_completed_event(passed, checks), args.output)
    return EXIT_OK if passed else EXIT_DOMAIN_ERROR


# ============================================================================
# Parser
# ============================================================================


def _add_common(p: argparse.ArgumentParser, fmt: bool = False) -> None:
    p.add_argument("--output", "-o", help="output file (default: stdout)")
    p.add_argument("--level", type=float, default=DEFAULT_LEVEL, help="quantile level (default 0.95)")
    if fmt:
        p.add_argument("--format", choices=["json", "csv"], default="json")


def _add_sim(p: argparse.ArgumentParser, n_customers: int) -> None:
    p.add_argument("--seed", type=int, default=config.SEED)
    p.add_argument("--n-customers", type=int, default=n_customers)
    p.add_argument("--replications", type=int, default=None)
    p.add_argument("--n-paths", type=int, default=None, help="paths per ruin or ordering estimate")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mxqueue", description="Waiting-time, workload and ruin laws under dependence")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="exact laws for a model file")
    p.add_argument("model", help="model JSON file")
    p.add_argument("--grid", type=parse_grid, default=parse_grid(DEFAULT_GRID))
    _add_common(p, fmt=True)
    p.set_defaults(handler=cmd_analyze)

    p = sub.add_parser("table", help="recompute a published table")
    p.add_argument("which", choices=sorted(TABLES))
    p.add_argument("--normalization", choices=NORMALIZATIONS, default=None)
    p.add_argument("--curves", help="also write P(W>u) curves of every row to this CSV")
    p.add_argument("--grid", type=parse_grid, default=parse_grid(DEFAULT_GRID))
    _add_common(p, fmt=True)
    p.set_defaults(handler=cmd_table)

    p = sub.add_parser("simulate", help="Monte-Carlo estimates next to the exact values")
    p.add_argument("model", help="model JSON file")
    p.add_argument("--grid", type=parse_grid, default=parse_grid("1,2,5"))
    p.add_argument("--lst-grid", type=parse_grid, default=np.array([]))
    p.add_argument("--ruin-u", type=parse_floats, default=None, help="capitals for the ruin simulations")
    _add_common(p)
    _add_sim(p, config.N_CUSTOMERS)
    p.set_defaults(handler=cmd_simulate)

    p = sub.add_parser("ordering", help="convex ordering of A - B across the three scenarios")
    p.add_argument("--K", type=int, required=True)
    p.add_argument("--weights", type=parse_floats, required=True)
    p.add_argument("--lam", type=float, required=True)
    p.add_argument("--mu", type=float, required=True)
    p.add_argument("--t-grid", type=parse_grid, default=None)
    p.add_argument("--check-negative", action="store_true", help="test D0 <= D- even for non-symmetric weights")
    p.add_argument("--empirical", action="store_true", help="add common-random-number estimates")
    _add_common(p)
    _add_sim(p, config.N_CUSTOMERS)
    p.set_defaults(handler=cmd_ordering)

    p = sub.add_parser("verify", help="run the verification sweep")
    p.add_argument("--no-simulation", action="store_true")
    p.add_argument("--inject-fault", action="store_true", help="flip a root sign to exercise the count assertions")
    p.add_argument("--normalization", choices=NORMALIZATIONS, default=None)
    _add_common(p)
    _add_sim(p, config.VERIFY_N_CUSTOMERS)
    p.set_defaults(handler=cmd_verify)

    return parser


def attach_list_values(argv: Sequence[str]) -> List[str]:
    """Rewrite ``--t-grid -2,0,2`` as ``--t-grid=-2,0,2`` so argparse does not read the value as an option."""
    out: List[str] = []
    i = 0
    while i < len(argv):
        token = argv[i]
        if token in LIST_OPTIONS and i + 1 < len(argv) and NEGATIVE_VALUE.match(argv[i + 1]):
            out.append(f"{token}={argv[i + 1]}")
            i += 2
            continue
        out.append(token)
        i += 1
    return out


def main(argv: Optional[Sequence[str]] = None) -> int:
    setup_logging("mxqueue")
    parser = build_parser()
    args = parser.parse_args(attach_list_values(sys.argv[1:] if argv is None else list(argv)))
    try:
        return args.handler(args)
    except MxQueueError as e:
        logger.error(f"❌ {e.error_type}: {e.message}")
        write_json(create_error_event(e.error_type, e.message, e.details), None)
        return EXIT_DOMAIN_ERROR
    except (argparse.ArgumentTypeError, ValidationError) as e:
        logger.error(f"❌ usage: {e}")
        write_json(create_error_event("UsageError", str(e)), None)
        return EXIT_USAGE
    except ValueError as e:
        # numerical failures below the domain layer, e.g. an inexact polynomial division
        logger.error(f"❌ numerical error: {e}")
        write_json(create_error_event("NumericalError", str(e)), None)
        return EXIT_DOMAIN_ERROR
    except FileNotFoundError as e:
        write_json(create_error_event("FileNotFound", str(e)), None)
        return EXIT_USAGE
