#!/usr/bin/env python3
"""
Command-line runner for SIS model analyses.

Usage:
    python -m src.sis_runner analyze models/zoonosis.model
    python -m src.sis_runner equilibria models/zoonosis.model --csv catalog.csv
    python -m src.sis_runner equilibria models/reservoir.model --reservoir
    python -m src.sis_runner simulate models/westnile.model --init mask:H --tmax 200 --out traj.csv
    python -m src.sis_runner vaccinate models/scalar_supercritical.model --eta from-equilibrium
    python -m src.sis_runner --tol equilibrium=1e-12 --json analyze models/westnile.model

Exit codes: 0 success, 2 input error, 3 resource cap, 4 convergence failure.
"""
import argparse
import json
import logging
import sys
import uuid
from pathlib import Path
from typing import Any, Callable, Optional, Sequence

import numpy as np

# Add project root to path
sys.path.insert(0, str(Path(__file__).parent.parent))

# Load environment variables
from dotenv import load_dotenv
load_dotenv()

from config.constants import LOG_DATE_FORMAT, SYSTEM_LOG_FILENAME, ExitCode
from config.settings import TOLERANCE_KEYS, apply_overrides, get_settings
from core.errors import InputError, ModelValidationError, SISError
from core.model import SISModel, as_state, indicator, mask_from_labels, validate_assumptions
from data.export import write_catalog_csv, write_trajectory_csv
from data.model_io import load_model, load_reservoir_model, load_vector
from dynamics.equilibrium import predict_limit
from dynamics.integrator import Trajectory, integrate
from equilibria.catalog import EquilibriumCatalog, equilibrium_catalog
from equilibria.vaccination import critical_vaccination_check
from logging_system.unified_logger import UnifiedLogger, create_default_logger
from monitoring.resources import get_monitor
from reservoir.equilibria import reservoir_equilibria, reservoir_predict_limit
from reservoir.model import integrate_reservoir
from spectral.reproduction import Re, spectral_bound_sign
from structure.atoms import AtomDecomposition, decompose, is_monatomic, supercritical_antichains

logger = logging.getLogger(__name__)


def setup_logging(level: str, log_dir: Path) -> None:
    """Log to stderr and to the system log file."""
    log_dir.mkdir(parents=True, exist_ok=True)
    logging.basicConfig(
        level=getattr(logging, level.upper()),
        format="%(asctime)s [%(levelname)s] %(name)s: %(message)s",
        datefmt=LOG_DATE_FORMAT,
        handlers=[
            logging.StreamHandler(sys.stderr),
            logging.FileHandler(log_dir / SYSTEM_LOG_FILENAME),
        ],
        force=True,
    )


def parse_tolerances(pairs: Optional[Sequence[str]]) -> dict[str, float]:
    """
    Parse --tol name=value pairs.

    Raises:
        InputError: Malformed pair or unknown name
    """
    overrides: dict[str, float] = {}
    for pair in pairs or ():
        name, sep, value = pair.partition("=")
        if not sep:
            raise InputError(f"--tol expects name=value, got '{pair}'")
        if name not in TOLERANCE_KEYS:
            raise InputError(f"Unknown tolerance '{name}'; expected one of {sorted(TOLERANCE_KEYS)}")
        try:
            overrides[name] = float(value)
        except ValueError:
            raise InputError(f"--tol {name} expects a number, got '{value}'")
    return overrides


def resolve_initial_state(spec: str, model: SISModel) -> np.ndarray:
    """
    Initial state from an --init spec: ones, zeros, mask:<labels>,
    file:<vector-file> or random:<seed>.

    Raises:
        InputError: Unknown spec, unknown label or entries outside [0, 1]
    """
    kind, _, value = spec.partition(":")
    if kind == "ones":
        return np.ones(model.n)
    if kind == "zeros":
        return np.zeros(model.n)
    if kind == "mask":
        labels = [label.strip() for label in value.split(",") if label.strip()]
        return indicator(mask_from_labels(model.space, labels))
    if kind == "file":
        return as_state(model, load_vector(value, model.n))
    if kind == "random":
        try:
            seed = int(value)
        except ValueError:
            raise InputError(f"random init expects an integer seed, got '{value}'")
        return np.random.default_rng(seed).uniform(0.0, 1.0, size=model.n)
    raise InputError(f"Unknown --init spec '{spec}'; use ones, zeros, mask:<labels>, file:<path> or random:<seed>")


def _validated(model: SISModel, events: UnifiedLogger) -> None:
    report = validate_assumptions(model)
    events.log_model_validation(model.name, report.passed, report.violations)
    if not report.passed:
        raise ModelValidationError(f"model '{model.name}' violates the standing assumptions:\n"
                                   + report.format_report(), report)


def _note_near_critical(decomposition: AtomDecomposition, events: UnifiedLogger) -> None:
    for i in decomposition.near_critical:
        atom = decomposition.atoms[i]
        events.log_near_critical_atom(atom.name, atom.r0)


def _note_catalog(catalog: EquilibriumCatalog, events: UnifiedLogger) -> None:
    for record in catalog.records:
        events.log_equilibrium_found(record.antichain_name, record.support_labels, record.residual,
                                     is_maximal=record.is_maximal)


# =========================================================================
# Commands
# =========================================================================

def cmd_analyze(args: argparse.Namespace, events: UnifiedLogger) -> tuple[dict, str]:
    model = load_model(args.model)
    events.log_model_loaded(model.name, model.n, model.incidence.name)
    _validated(model, events)

    decomposition = decompose(model)
    _note_near_critical(decomposition, events)
    antichains = supercritical_antichains(decomposition)
    bound = spectral_bound_sign(model)

    payload = decomposition.to_dict()
    payload["supercritical_antichains"] = len(antichains)
    payload["spectral_bound"] = bound.to_dict()
    payload["monatomic"] = is_monatomic(decomposition)

    text = "\n".join([
        decomposition.format_report(),
        f"Supercritical antichains: {len(antichains)} (equilibria, DFE included)",
        f"Spectral bound of T - gamma: {bound.sign.value} ({bound.value:.10g})",
    ])
    return payload, text


def cmd_equilibria(args: argparse.Namespace, events: UnifiedLogger) -> tuple[dict, str]:
    workers = args.workers
    if args.reservoir:
        rm = load_reservoir_model(args.model)
        events.log_model_loaded(rm.name, rm.n, rm.base.incidence.name, reservoir=True, a=rm.a, b=rm.b)
        catalog = reservoir_equilibria(rm, workers=workers)
    else:
        model = load_model(args.model)
        events.log_model_loaded(model.name, model.n, model.incidence.name)
        _validated(model, events)
        decomposition = decompose(model)
        _note_near_critical(decomposition, events)
        catalog = equilibrium_catalog(model, decomposition, workers=workers)

    _note_catalog(catalog, events)
    payload = catalog.to_dict()
    if args.csv:
        payload["csv"] = str(write_catalog_csv(catalog, args.csv))
    return payload, catalog.format_report()


def _distances(final: np.ndarray, predicted: np.ndarray, gamma: np.ndarray) -> dict[str, float]:
    diff = np.abs(final - predicted)
    return {"sup": float(diff.max()), "gamma_weighted": float((diff * gamma).max())}


def cmd_simulate(args: argparse.Namespace, events: UnifiedLogger) -> tuple[dict, str]:
    tmax = get_settings().dynamics.t_max if args.tmax is None else args.tmax
    trajectory: Trajectory
    if args.reservoir:
        rm = load_reservoir_model(args.model)
        events.log_model_loaded(rm.name, rm.n, rm.base.incidence.name, reservoir=True, a=rm.a, b=rm.b)
        h = resolve_initial_state(args.init, rm.base)
        prediction = reservoir_predict_limit(rm, h)
        trajectory = integrate_reservoir(rm, h, t_max=tmax)
        final = trajectory.final_state[: rm.n]
        gamma = rm.base.gamma
    else:
        model = load_model(args.model)
        events.log_model_loaded(model.name, model.n, model.incidence.name)
        _validated(model, events)
        h = resolve_initial_state(args.init, model)
        prediction = predict_limit(model, decompose(model), h)
        trajectory = integrate(model, h, t_max=tmax)
        final = trajectory.final_state
        gamma = model.gamma

    events.log_limit_predicted(prediction.antichain_name, prediction.support_labels, init=args.init)
    if trajectory.max_clamp > get_settings().dynamics.clamp_warn:
        events.log_clamp_applied(trajectory.max_clamp)

    distance = _distances(final, prediction.state, gamma)
    matched = distance["sup"] <= get_settings().dynamics.match_tol
    events.log_verification_result("simulated limit matches prediction", matched, **distance)

    payload: dict[str, Any] = {
        "init": args.init,
        "predicted": prediction.to_dict(),
        "final_time": trajectory.final_time,
        "final_residual": trajectory.final_residual,
        "terminal_reason": trajectory.terminal_reason.value,
        "distance": distance,
        "matched": matched,
        "trajectory": trajectory.to_dict(),
    }
    if args.out:
        payload["csv"] = str(write_trajectory_csv(trajectory, args.out, args.stride))

    text = "\n".join([
        f"Predicted limit: antichain {prediction.antichain_name}, support {{{','.join(prediction.support_labels)}}}"
        + (" (g*)" if prediction.is_maximal else ""),
        f"Observed at t = {trajectory.final_time:.6g} ({trajectory.terminal_reason.value}), "
        f"residual {trajectory.final_residual:.3e}",
        f"Distance to prediction: sup {distance['sup']:.3e}, gamma-weighted {distance['gamma_weighted']:.3e}",
    ])
    return payload, text


def cmd_vaccinate(args: argparse.Namespace, events: UnifiedLogger) -> tuple[dict, str]:
    model = load_model(args.model)
    events.log_model_loaded(model.name, model.n, model.incidence.name)

    if args.eta == "from-equilibrium":
        _validated(model, events)
        catalog = equilibrium_catalog(model, decompose(model), workers=args.workers)
        report = critical_vaccination_check(model, catalog)
        events.log_verification_result("critical vaccination identity", report.passed)
        return report.to_dict(), report.format_report()

    if args.eta in ("ones", "zeros"):
        eta = np.ones(model.n) if args.eta == "ones" else np.zeros(model.n)
    else:
        eta = as_state(model, load_vector(args.eta, model.n))
    value = Re(model, eta)
    payload = {"model": model.name, "eta": eta.tolist(), "re": value}
    return payload, f"Re(eta) = {value:.10f} for '{model.name}'"


COMMANDS: dict[str, Callable[[argparse.Namespace, UnifiedLogger], tuple[dict, str]]] = {
    "analyze": cmd_analyze,
    "equilibria": cmd_equilibria,
    "simulate": cmd_simulate,
    "vaccinate": cmd_vaccinate,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description="Equilibria and long-time behavior of heterogeneous SIS models",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog=f"Tolerance names for --tol: {', '.join(sorted(TOLERANCE_KEYS))}",
    )
    parser.add_argument("--tol", action="append", metavar="NAME=VALUE", help="Override a tolerance")
    parser.add_argument("--json", action="store_true", help="Print structured output instead of text")
    parser.add_argument("--log-level", default="WARNING",
                        choices=["DEBUG", "INFO", "WARNING", "ERROR"], help="Console log level")
    parser.add_argument("--log-dir", type=Path, default=None, help="Directory of the log files")
    parser.add_argument("--workers", type=int, default=None, help="Threads for the equilibrium catalog")

    sub = parser.add_subparsers(dest="command", required=True)

    analyze = sub.add_parser("analyze", help="Atoms, order and reproduction numbers")
    analyze.add_argument("model", help="Model file")

    equilibria = sub.add_parser("equilibria", help="Catalog of all equilibria")
    equilibria.add_argument("model", help="Model file")
    equilibria.add_argument("--reservoir", action="store_true", help="Use the kappa field of the model file")
    equilibria.add_argument("--csv", type=Path, default=None, help="Write the catalog as CSV")

    simulate = sub.add_parser("simulate", help="Integrate from an initial state and compare with the prediction")
    simulate.add_argument("model", help="Model file")
    simulate.add_argument("--init", default="ones", help="ones, zeros, mask:<labels>, file:<path> or random:<seed>")
    simulate.add_argument("--tmax", type=float, default=None, help="Integration horizon")
    simulate.add_argument("--out", type=Path, default=None, help="Write the trajectory as CSV")
    simulate.add_argument("--stride", type=int, default=None, help="Keep every k-th sample in the CSV")
    simulate.add_argument("--reservoir", action="store_true", help="Simulate the reservoir model")

    vaccinate = sub.add_parser("vaccinate", help="Effective reproduction number")
    vaccinate.add_argument("model", help="Model file")
    vaccinate.add_argument("--eta", required=True, help="Vector file, ones, zeros or from-equilibrium")

    return parser


def run(argv: Optional[Sequence[str]] = None) -> int:
    """Run one command; returns the exit code."""
    parser = build_parser()
    args = parser.parse_args(argv)

    log_dir = args.log_dir or get_settings().run.log_dir
    setup_logging(args.log_level, log_dir)
    events = create_default_logger(source="sis_runner", log_dir=log_dir, correlation_id=uuid.uuid4().hex[:12])
    events.log_analysis_start(args.command, getattr(args, "model", ""))

    monitor = get_monitor()
    monitor.start()
    exit_code = ExitCode.SUCCESS
    try:
        apply_overrides(parse_tolerances(args.tol))
        payload, text = COMMANDS[args.command](args, events)
        usage = monitor.stop()
        payload["resources"] = usage.to_dict()
        if args.json:
            print(json.dumps(payload, indent=2, default=str))
        else:
            print(text)
    except SISError as e:
        exit_code = e.exit_code
        events.log_error(e, context=args.command)
        if args.json:
            print(json.dumps(e.to_dict(), indent=2, default=str))
        print(f"error: {e}", file=sys.stderr)
    except KeyboardInterrupt:
        logger.info("Analysis interrupted by user")
        exit_code = ExitCode.INTERRUPTED

    events.log_analysis_complete(args.command, int(exit_code), monitor.get_elapsed_seconds())
    return int(exit_code)


def main() -> None:
    """Main entry point."""
    sys.exit(run())


if __name__ == "__main__":
    main()
