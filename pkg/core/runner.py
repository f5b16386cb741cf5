"""
Batch commands behind the CLI.
Runs presets, convergence ladders and the flux property suite, and keeps the
run ledger up to date.
"""
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from datetime import datetime
from typing import Callable, Optional

import numpy as np
from sqlalchemy.orm import Session

import settings
from core.config import RunConfig, resolve_workers
from core.diagnostics import (
    ErrorReport, convergence_orders, entropy_increases, error_norms, total_entropy,
    write_convergence_table, write_entropy_series, write_grid, write_profile,
)
from core.errors import ConfigError, RMHDError
from core.fluxes import (
    ec_condition_residual, ec_flux, entropy_balance, es_entropy_production, pair_means, parameter_vector,
)
from core.limiters import LimiterPipeline
from core.models import ConvergenceLevel, ConvergenceStudy, EntropySample, ErrorRecord, SimulationRun
from core.pdf_export import generate_convergence_pdf, generate_run_pdf
from core.physics import (
    BX, EosParams, entropy_potential_prim, physical_flux, prim_to_cons, random_primitive_states,
)
from core.problems import PRESETS, RIEMANN_STATES, ProblemSpec, get_problem
from core.sbp import build_operator, sbp_residual
from core.solver import DGField, integrate

logger = logging.getLogger(__name__)


@dataclass
class RunSetup:
    problem: ProblemSpec
    cells: tuple
    field: DGField
    limiter: Optional[LimiterPipeline]
    t_end: float
    stepping: dict = field(default_factory=dict)


@dataclass
class RunOutcome:
    field: DGField
    steps: int
    entropy: list
    errors: Optional[ErrorReport] = None
    profile_path: Optional[str] = None
    entropy_path: Optional[str] = None
    flagged_cells: int = 0
    rejected_steps: int = 0
    run_id: Optional[int] = None

    @property
    def entropy_rises(self) -> list:
        return entropy_increases([s for _, _, s in self.entropy], settings.ENTROPY_SLACK)


class EntropyMonitor:
    """on_step observer recording the quadrature total entropy."""

    def __init__(self, eos: EosParams, slack: float = settings.ENTROPY_SLACK):
        self.eos = eos
        self.slack = slack
        self.samples = []

    def __call__(self, step: int, field_: DGField):
        value = total_entropy(field_, self.eos)
        if self.samples:
            previous = self.samples[-1][2]
            if value - previous > self.slack * abs(previous):
                logger.warning("Total entropy rose at step %d (t=%.6g): %.16e -> %.16e",
                               step, field_.t, previous, value)
        self.samples.append((step, float(field_.t), value))


def prepare(config: RunConfig) -> RunSetup:
    """Problem, mesh, initial field and limiter for a config."""
    problem = get_problem(config.problem)
    cells = config.cells(problem.cells)
    op = build_operator(config.r)
    field_ = problem.initial_field(op, cells)
    limiter_config = config.limiter_config(problem.limiter)
    limiter = None
    if limiter_config.enabled or limiter_config.pcp:
        limiter = LimiterPipeline(field_, limiter_config, problem.eos)
    t_end = problem.t_end if config.t_end is None else config.t_end
    return RunSetup(problem, cells, field_, limiter, t_end, config.stepping(problem))


def output_stem(config: RunConfig, cells: tuple) -> str:
    return os.path.join(config.out_dir, f"{config.problem}_{'x'.join(map(str, cells))}_r{config.r}")


def simulate(config: RunConfig, write_files: bool = True, fixed_dt: Optional[float] = None) -> RunOutcome:
    """
    Integrates a preset to its final time. Writes the profile/grid and the
    entropy series when write_files is set; compares with the exact solution
    when the preset has one.
    """
    setup = prepare(config)
    problem, eos = setup.problem, setup.problem.eos
    stepping = setup.stepping
    logger.info("run %s: cells=%s r=%d cfl=%g flux=%s signal=%s t_end=%g",
                problem.name, setup.cells, config.r, stepping["cfl"], config.flux,
                stepping["signal_speed"], setup.t_end)

    monitor = EntropyMonitor(eos)
    result = integrate(setup.field, eos, setup.t_end, limiter=setup.limiter, flux_mode=config.flux,
                       on_step=monitor, fixed_dt=fixed_dt, log_every=settings.LOG_EVERY, **stepping)

    outcome = RunOutcome(field=result.field, steps=result.steps, entropy=monitor.samples,
                         flagged_cells=setup.limiter.flagged_total if setup.limiter else 0,
                         rejected_steps=result.rejected)
    if problem.exact is not None:
        variable = config.variable or problem.variable
        outcome.errors = error_norms(result.field, problem.exact, variable, eos)
        logger.info("%s errors: l1=%.3e l2=%.3e linf=%.3e", variable,
                    outcome.errors.l1, outcome.errors.l2, outcome.errors.linf)

    if write_files:
        os.makedirs(config.out_dir, exist_ok=True)
        stem = output_stem(config, setup.cells)
        extra = {"cfl": stepping["cfl"], "signal_speed": stepping["signal_speed"],
                 "flux": config.flux, "limiter": config.limiter,
                 "steps": result.steps, "seed": config.seed}
        if problem.dimension == 1:
            outcome.profile_path = write_profile(result.field, stem + settings.PROFILE_SUFFIX, eos, problem.name, extra)
        else:
            outcome.profile_path = write_grid(result.field, stem + settings.GRID_SUFFIX, eos, problem.name, extra)
        outcome.entropy_path = write_entropy_series(monitor.samples, stem + settings.ENTROPY_SUFFIX)
    logger.info("run %s finished: %d steps, t=%.6g", problem.name, result.steps, result.field.t)
    return outcome


# ---------------------------------------------------------------------------
# Run ledger
# ---------------------------------------------------------------------------

def start_run(db: Session, config: RunConfig) -> SimulationRun:
    """
    Records a run in state "running" before integration starts.
    """
    problem = get_problem(config.problem)
    cells = config.cells(problem.cells)
    run = SimulationRun(
        problem=problem.name,
        dimension=problem.dimension,
        nx=cells[0],
        ny=cells[1] if len(cells) > 1 else None,
        degree=config.r,
        cfl=config.stepping(problem)["cfl"],
        t_end=problem.t_end if config.t_end is None else config.t_end,
        flux_mode=config.flux,
        limiter=config.limiter,
        status="running",
    )
    db.add(run)
    db.commit()
    db.refresh(run)
    return run


def finish_run(db: Session, run: SimulationRun, outcome: RunOutcome) -> SimulationRun:
    run.status = "finished"
    run.steps = outcome.steps
    run.final_time = float(outcome.field.t)
    run.profile_path = outcome.profile_path
    run.entropy_path = outcome.entropy_path
    run.finished_at = datetime.utcnow()
    rises = outcome.entropy_rises
    run.message = f"entropy rose at {len(rises)} step(s)" if rises else "entropy nonincreasing"
    if outcome.errors is not None:
        e = outcome.errors
        db.add(ErrorRecord(run_id=run.id, variable=e.variable, l1=e.l1, l2=e.l2, linf=e.linf))
    for step, t, value in outcome.entropy:
        db.add(EntropySample(run_id=run.id, step=step, time=t, entropy=value))
    db.commit()
    db.refresh(run)
    return run


def fail_run(db: Session, run: SimulationRun, message: str) -> SimulationRun:
    run.status = "failed"
    run.message = message
    run.finished_at = datetime.utcnow()
    db.commit()
    return run


def cmd_run(db: Session, config: RunConfig) -> RunOutcome:
    """
    Runs one preset and records it. Solver failures mark the run failed and
    propagate.
    """
    run = start_run(db, config)
    try:
        outcome = simulate(config)
    except RMHDError as exc:
        logger.error("run %d failed: %s", run.id, exc)
        fail_run(db, run, str(exc))
        raise
    finish_run(db, run, outcome)
    outcome.run_id = run.id
    return outcome


# ---------------------------------------------------------------------------
# Convergence
# ---------------------------------------------------------------------------

def _ladder(config: RunConfig, problem: ProblemSpec) -> tuple:
    if config.ladder:
        return tuple(config.ladder)
    return settings.DEFAULT_LADDERS.get(problem.name, settings.FALLBACK_LADDER)


def run_level(config: RunConfig, n: int) -> ErrorReport:
    """One ladder level on an n (x n) mesh; top level so worker processes can pickle it."""
    level = replace(config, nx=n, ny=n)
    outcome = simulate(level, write_files=False)
    return outcome.errors


def record_study(db: Session, problem: str, variable: str, degree: int, rows, table_path: str = None):
    """
    Stores a convergence table.
    """
    study = ConvergenceStudy(problem=problem, variable=variable, degree=degree, table_path=table_path)
    db.add(study)
    db.flush()
    for row in rows:
        r = row.report
        db.add(ConvergenceLevel(study_id=study.id, n=r.n, l1=r.l1, l2=r.l2, linf=r.linf,
                                order_l1=row.order_l1, order_l2=row.order_l2, order_linf=row.order_linf))
    db.commit()
    db.refresh(study)
    return study


def cmd_convergence(db: Session, config: RunConfig):
    """
    Runs the mesh ladder, writes the CSV table and records the study.
    Returns (study, rows).
    """
    problem = get_problem(config.problem)
    if problem.exact is None:
        raise ConfigError(f"Problem {problem.name} has no exact solution; convergence needs one")
    ladder = _ladder(config, problem)
    variable = config.variable or problem.variable
    workers = min(resolve_workers(config), len(ladder))
    logger.info("convergence %s: ladder %s, %d worker(s)", problem.name, ladder, workers)

    if workers == 1:
        reports = [run_level(config, n) for n in ladder]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            reports = list(pool.map(run_level, [config] * len(ladder), ladder))

    rows = convergence_orders(reports)
    for row in rows:
        logger.info("n=%d l1=%.3e order=%s", row.report.n, row.report.l1,
                    "-" if row.order_l1 is None else f"{row.order_l1:.2f}")

    os.makedirs(config.out_dir, exist_ok=True)
    path = os.path.join(config.out_dir, f"{problem.name}_r{config.r}{settings.CONVERGENCE_SUFFIX}")
    write_convergence_table(rows, path)
    study = record_study(db, problem.name, variable, config.r, rows, path)
    return study, rows


# ---------------------------------------------------------------------------
# Flux property suite
# ---------------------------------------------------------------------------

@dataclass
class FluxCheckReport:
    samples: int
    residuals: dict = field(default_factory=dict)
    bounds: dict = field(default_factory=dict)
    max_inverse_dcal: float = 0.0

    @property
    def violations(self) -> list:
        return [name for name, value in self.residuals.items() if not value <= self.bounds[name]]

    @property
    def passed(self) -> bool:
        return not self.violations


def _record(report: FluxCheckReport, name: str, value: float, bound: float):
    report.residuals[name] = max(report.residuals.get(name, 0.0), float(value))
    report.bounds[name] = bound


def cmd_fluxcheck(config: RunConfig, flux: Optional[Callable] = None) -> FluxCheckReport:
    """
    Property suite for a two-point flux flux(direction, UL, UR, eos): entropy
    conservation, symmetry, consistency, zero normal-field component, the
    entropy stability of the interface flux, and the SBP identity.
    """
    flux = ec_flux if flux is None else flux
    report = FluxCheckReport(samples=config.samples)
    if config.samples == 0:
        logger.warning("fluxcheck with zero samples: property checks pass vacuously")
    rng = np.random.default_rng(config.seed)
    gammas = (5.0 / 3.0, 2.0)

    for i, gamma in enumerate(gammas):
        n = config.samples // len(gammas) + (1 if i < config.samples % len(gammas) else 0)
        if n == 0:
            continue
        eos = EosParams(gamma)
        PL = random_primitive_states(rng, n)
        PR = random_primitive_states(rng, n)
        UL, UR = prim_to_cons(PL, eos), prim_to_cons(PR, eos)

        dcal = pair_means(parameter_vector(PL), parameter_vector(PR), gamma).Dcal
        report.max_inverse_dcal = max(report.max_inverse_dcal, float(np.max(1.0 / np.abs(dcal))))

        for direction in range(3):
            F = flux(direction, UL, UR, eos)
            dV_F, _, _ = entropy_balance(direction, UL, UR, F, eos)
            psi = np.maximum(np.abs(entropy_potential_prim(PL, direction, gamma)),
                             np.abs(entropy_potential_prim(PR, direction, gamma)))
            ec = np.abs(ec_condition_residual(direction, UL, UR, eos, flux=F)) / (1.0 + psi)
            _record(report, "entropy_conservation", np.max(ec), settings.FLUXCHECK_TOL)

            flux_scale = 1.0 + np.max(np.abs(F), axis=-1)
            sym = np.max(np.abs(F - flux(direction, UR, UL, eos)), axis=-1) / flux_scale
            _record(report, "symmetry", np.max(sym), settings.FLUXCHECK_TOL)

            F_same = flux(direction, UL, UL, eos)
            F_exact = physical_flux(UL, direction, eos)
            cons = np.max(np.abs(F_same - F_exact), axis=-1) / (1.0 + np.max(np.abs(F_exact), axis=-1))
            _record(report, "consistency", np.max(cons), settings.FLUXCHECK_TOL)

            _record(report, "normal_field_component", np.max(np.abs(F[..., BX + direction])), 0.0)

            production = es_entropy_production(direction, UL, UR, eos) / (1.0 + np.maximum(psi, np.abs(dV_F)))
            _record(report, "entropy_stability", np.max(production), settings.FLUXCHECK_ES_SLACK)

    for key in ("I",):
        gamma, left, right = RIEMANN_STATES[key]
        eos = EosParams(gamma)
        UL = prim_to_cons(np.array(left), eos)
        UR = prim_to_cons(np.array(right), eos)
        _record(report, "riemann_I_dissipation", float(es_entropy_production(0, UL, UR, eos)), 0.0)

    for r in settings.FLUXCHECK_DEGREES:
        _record(report, "sbp_identity", sbp_residual(build_operator(r)), settings.FLUXCHECK_SBP_TOL)

    for name in report.violations:
        logger.warning("fluxcheck violation: %s = %.3e > %.1e", name, report.residuals[name], report.bounds[name])
    return report


# ---------------------------------------------------------------------------
# Reports and catalogue
# ---------------------------------------------------------------------------

def get_run(db: Session, run_id: int) -> SimulationRun:
    run = db.query(SimulationRun).filter(SimulationRun.id == run_id).first()
    if run is None:
        raise ConfigError(f"No run with id {run_id}")
    return run


def get_study(db: Session, study_id: int) -> ConvergenceStudy:
    study = db.query(ConvergenceStudy).filter(ConvergenceStudy.id == study_id).first()
    if study is None:
        raise ConfigError(f"No convergence study with id {study_id}")
    return study


def report(db: Session, pdf_path: str, run_id: int = None, study_id: int = None) -> str:
    """
    Writes the PDF report of a run or a convergence study.
    """
    if (run_id is None) == (study_id is None):
        raise ConfigError("Give exactly one of run id and study id")
    if run_id is not None:
        return generate_run_pdf(get_run(db, run_id), pdf_path)
    return generate_convergence_pdf(get_study(db, study_id), pdf_path)


def list_presets() -> list:
    """(name, dimension, gamma, t_end, default cells, description) per preset."""
    rows = []
    for name, build in PRESETS.items():
        p = build()
        rows.append((name, p.dimension, p.eos.gamma, p.t_end, "x".join(map(str, p.cells)), p.description))
    return rows
