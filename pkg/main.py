"""
Main entry point for rmhd-esdg.
Batch CLI: run presets, convergence ladders, the flux property suite and
ledger reports.
"""
import argparse
import logging
import os
import sys

from dotenv import load_dotenv

# Load environment variables
load_dotenv()

import settings  # noqa: E402
from core.config import load_config  # noqa: E402
from core.db import open_session  # noqa: E402
from core.errors import ConfigError, RMHDError  # noqa: E402
from core.runner import cmd_convergence, cmd_fluxcheck, cmd_run, list_presets, report  # noqa: E402

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_SOLVER = 2
EXIT_FLUXCHECK = 3

logger = logging.getLogger("rmhd")


def _add_run_flags(parser):
    parser.add_argument("--config", help="flat key=value config file")
    parser.add_argument("--problem", help="preset name (see `presets`)")
    parser.add_argument("--nx", type=int)
    parser.add_argument("--ny", type=int)
    parser.add_argument("--r", type=int, help=f"polynomial degree (default {settings.DEFAULT_DEGREE})")
    parser.add_argument("--cfl", type=float, help=f"CFL number (default: preset value or {settings.DEFAULT_CFL})")
    parser.add_argument("--tend", type=float, help="final time override")
    parser.add_argument("--tvb-m", dest="tvb_M", type=float, help="TVB constant M")
    parser.add_argument("--limiter", choices=("on", "off"))
    parser.add_argument("--characteristic", choices=("on", "off"), help="TVB on characteristic fields")
    parser.add_argument("--indicator", choices=("kxrcf", "all"))
    parser.add_argument("--flux", choices=("es", "ec"), help="interface flux: es (default) or ec")
    parser.add_argument("--signal-speed", dest="signal_speed", choices=("light", "fast"),
                        help="dissipation and time-step speed bound (default: preset)")
    parser.add_argument("--entropy-guard", dest="entropy_guard", choices=("on", "off"),
                        help="halve the time step when total entropy rises (default: preset)")
    parser.add_argument("--workers", type=int)
    parser.add_argument("--deterministic", action="store_const", const="on", help="force a single worker")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--out", help=f"output directory (default {settings.DEFAULT_OUT_DIR})")
    parser.add_argument("--variable", help="error variable, e.g. By or D")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rmhd", description="Entropy stable DG solver for relativistic MHD")
    sub = parser.add_subparsers(dest="command", required=True)

    _add_run_flags(sub.add_parser("run", help="integrate a preset to its final time"))

    convergence = sub.add_parser("convergence", help="errors and orders over a mesh ladder")
    _add_run_flags(convergence)
    convergence.add_argument("--ladder", help="comma-separated cell counts, e.g. 20,40,80")

    fluxcheck = sub.add_parser("fluxcheck", help="property suite of the two-point fluxes")
    fluxcheck.add_argument("--config")
    fluxcheck.add_argument("--seed", type=int)
    fluxcheck.add_argument("--samples", type=int)

    rep = sub.add_parser("report", help="PDF report of a recorded run or study")
    target = rep.add_mutually_exclusive_group(required=True)
    target.add_argument("--run-id", type=int)
    target.add_argument("--study-id", type=int)
    rep.add_argument("--pdf", required=True)

    sub.add_parser("presets", help="list the preset catalogue")
    return parser


_OVERRIDE_KEYS = ("problem", "nx", "ny", "r", "cfl", "tend", "tvb_M", "limiter", "characteristic",
                  "indicator", "flux", "signal_speed", "entropy_guard", "workers", "deterministic",
                  "seed", "out", "variable", "ladder", "samples")


def _overrides(args) -> dict:
    return {key: getattr(args, key) for key in _OVERRIDE_KEYS if getattr(args, key, None) is not None}


def _print_errors(outcome):
    e = outcome.errors
    if e is not None:
        print(f"{e.variable}: l1={e.l1:.3e}  l2={e.l2:.3e}  linf={e.linf:.3e}")


def _run(args) -> int:
    config = load_config(args.config, _overrides(args))
    db = open_session(config.database_url)
    try:
        outcome = cmd_run(db, config)
    finally:
        db.close()
    print(f"Run {outcome.run_id} finished: {outcome.steps} steps, t={outcome.field.t:.6g}")
    _print_errors(outcome)
    if outcome.profile_path:
        print(f"Output: {outcome.profile_path}")
        print(f"Entropy series: {outcome.entropy_path}")
    if outcome.entropy_rises:
        print(f"Warning: total entropy rose at {len(outcome.entropy_rises)} step(s)")
    return EXIT_OK


def _convergence(args) -> int:
    config = load_config(args.config, _overrides(args))
    db = open_session(config.database_url)
    try:
        study, rows = cmd_convergence(db, config)
        print(f"Study {study.id}: {study.problem}, errors in {study.variable}, r={study.degree}")
        print(f"{'N':>6} {'l1':>11} {'order':>6} {'l2':>11} {'order':>6} {'linf':>11} {'order':>6}")
        for row in rows:
            r = row.report
            orders = ["    -" if o is None else f"{o:6.2f}" for o in (row.order_l1, row.order_l2, row.order_linf)]
            print(f"{r.n:>6} {r.l1:11.3e} {orders[0]:>6} {r.l2:11.3e} {orders[1]:>6} {r.linf:11.3e} {orders[2]:>6}")
        print(f"Table: {study.table_path}")
    finally:
        db.close()
    return EXIT_OK


def _fluxcheck(args) -> int:
    config = load_config(args.config, _overrides(args))
    result = cmd_fluxcheck(config)
    print(f"Flux property suite: {result.samples} sample pairs, seed {config.seed}")
    for name, value in result.residuals.items():
        flag = "ok" if name not in result.violations else "VIOLATED"
        print(f"  {name:<24} {value:10.3e}  (bound {result.bounds[name]:.0e})  {flag}")
    print(f"  max |1/Dcal|             {result.max_inverse_dcal:10.3e}")
    return EXIT_OK if result.passed else EXIT_FLUXCHECK


def _report(args) -> int:
    config = load_config(None, {})
    db = open_session(config.database_url)
    try:
        path = report(db, args.pdf, run_id=args.run_id, study_id=args.study_id)
    finally:
        db.close()
    print(f"PDF generated: {path}")
    return EXIT_OK


def _presets(args) -> int:
    print(f"{'name':<14} {'dim':>3} {'gamma':>7} {'t_end':>6} {'cells':>9}  description")
    for name, dim, gamma, t_end, cells, description in list_presets():
        print(f"{name:<14} {dim:>3} {gamma:7.4g} {t_end:6g} {cells:>9}  {description}")
    return EXIT_OK


COMMANDS = {
    "run": _run,
    "convergence": _convergence,
    "fluxcheck": _fluxcheck,
    "report": _report,
    "presets": _presets,
}


def main(argv=None) -> int:
    logging.basicConfig(
        level=os.getenv("RMHD_LOG_LEVEL", "INFO").upper(),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        logger.error("%s", exc)
        print(f"Error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except RMHDError as exc:
        logger.error("%s", exc)
        print(f"Solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
