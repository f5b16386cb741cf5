"""
Nodal discontinuous Galerkin solver.
Mesh and field containers, the flux-differencing semi-discretisation with the
Godunov-Powell source in 1D and 2D, CFL time step, SSP-RK3 stepping and a
first-order Lax-Friedrichs finite-volume reference solver.

Field layout:
    1D  U[i, l, c]        cell i, node l
    2D  U[i, j, l, m, c]  cell (i, j), node l along x, node m along y
"""
import logging
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from core.errors import ConfigError, LimiterError, NumericalBlowupError, RecoveryError
from core.fluxes import ec_flux_params, lax_friedrichs, parameter_vector
from core.physics import (
    BX, NVARS, SIGNAL_SPEEDS, EosParams, cons_to_prim, entropy_pair_prim, entropy_variables_prim,
    flux_from_prim, max_signal_speed, phi_prime, prim_to_cons,
)
from core.sbp import QuadratureOperator

logger = logging.getLogger(__name__)

BOUNDARY_KINDS = ("periodic", "outflow", "dirichlet", "shifted")
FLUX_MODES = ("es", "ec")
ENTROPY_MAX_HALVINGS = 10


@dataclass(frozen=True)
class BoundaryCondition:
    """
    Ghost-state rule on one side of the domain.
    shifted: periodic in y with the partner cell moved `offset` cells along x.
    """
    kind: str
    offset: int = 0

    def __post_init__(self):
        if self.kind not in BOUNDARY_KINDS:
            raise ConfigError(f"Unknown boundary condition: {self.kind}")


PERIODIC = BoundaryCondition("periodic")
OUTFLOW = BoundaryCondition("outflow")
DIRICHLET = BoundaryCondition("dirichlet")


@dataclass(frozen=True)
class Mesh:
    """Uniform structured mesh; boundaries[d] = (low side, high side)."""
    cells: tuple
    lower: tuple
    upper: tuple
    boundaries: tuple

    def __post_init__(self):
        if len(self.cells) not in (1, 2):
            raise ConfigError("Mesh must be one- or two-dimensional")
        if not (len(self.cells) == len(self.lower) == len(self.upper) == len(self.boundaries)):
            raise ConfigError("Mesh cells, bounds and boundaries disagree in dimension")
        for n, lo, hi in zip(self.cells, self.lower, self.upper):
            if int(n) < 1 or not hi > lo:
                raise ConfigError(f"Invalid mesh extent: {n} cells on [{lo}, {hi}]")
        for d, pair in enumerate(self.boundaries):
            low, high = pair
            if (low.kind == "periodic") != (high.kind == "periodic"):
                raise ConfigError("Periodic boundaries must be paired")
            for bc in pair:
                if bc.kind == "shifted" and (len(self.cells) != 2 or d != 1):
                    raise ConfigError("Shifted-periodic boundaries exist only on the y sides of a 2D mesh")

    @property
    def dimension(self) -> int:
        return len(self.cells)

    @property
    def spacing(self) -> tuple:
        return tuple((hi - lo) / n for n, lo, hi in zip(self.cells, self.lower, self.upper))

    @property
    def measure(self) -> float:
        return float(np.prod([hi - lo for lo, hi in zip(self.lower, self.upper)]))

    def has_dirichlet(self) -> bool:
        return any(bc.kind == "dirichlet" for pair in self.boundaries for bc in pair)

    def node_coordinates(self, op: QuadratureOperator):
        """Physical coordinates of every node: [x] in 1D, [X, Y] in 2D (field layout minus components)."""
        axes = []
        for n, lo, h in zip(self.cells, self.lower, self.spacing):
            left = lo + h * np.arange(n)
            axes.append(left[:, None] + 0.5 * h * (op.nodes[None, :] + 1.0))
        if self.dimension == 1:
            return [axes[0]]
        x, y = axes
        X = np.broadcast_to(x[:, None, :, None], (self.cells[0], self.cells[1], op.n, op.n))
        Y = np.broadcast_to(y[None, :, None, :], (self.cells[0], self.cells[1], op.n, op.n))
        return [np.array(X), np.array(Y)]

    def cell_centers(self):
        return [lo + h * (np.arange(n) + 0.5) for n, lo, h in zip(self.cells, self.lower, self.spacing)]


def uniform_mesh(cells, lower, upper, boundaries) -> Mesh:
    return Mesh(tuple(int(n) for n in cells), tuple(map(float, lower)), tuple(map(float, upper)), tuple(boundaries))


@dataclass
class DGField:
    """
    Nodal conserved states on a mesh. `frozen` / `frozen_prim` keep the
    initial data backing dirichlet ghosts.
    """
    mesh: Mesh
    op: QuadratureOperator
    U: np.ndarray
    frozen: Optional[np.ndarray] = field(default=None, repr=False)
    frozen_prim: Optional[np.ndarray] = field(default=None, repr=False)
    t: float = 0.0

    def with_values(self, U, t=None) -> "DGField":
        return replace(self, U=U, t=self.t if t is None else t)

    def quadrature_weights(self) -> np.ndarray:
        """Weights w such that sum(w * f) approximates the domain integral of f."""
        op, mesh = self.op, self.mesh
        w = 0.5 * mesh.spacing[0] * op.weights
        if mesh.dimension == 1:
            return np.broadcast_to(w[None, :], self.U.shape[:-1])
        wy = 0.5 * mesh.spacing[1] * op.weights
        return np.broadcast_to((w[:, None] * wy[None, :])[None, None], self.U.shape[:-1])

    def cell_means(self, U=None) -> np.ndarray:
        """Quadrature cell averages, shape (cells..., 8)."""
        U = self.U if U is None else U
        w = 0.5 * self.op.weights
        if self.mesh.dimension == 1:
            return np.einsum("l,ilc->ic", w, U)
        return np.einsum("l,m,ijlmc->ijc", w, w, U)


def project_initial(mesh: Mesh, op: QuadratureOperator, initial, eos: EosParams) -> DGField:
    """Nodal interpolation of primitive initial data initial(*coords) -> P."""
    coords = mesh.node_coordinates(op)
    P = np.asarray(initial(*coords), dtype=float)
    U = prim_to_cons(P, eos)
    if mesh.has_dirichlet():
        return DGField(mesh, op, U, frozen=U.copy(), frozen_prim=P.copy())
    return DGField(mesh, op, U)


def domain_entropy(field_: DGField, eos: EosParams) -> float:
    """Quadrature sum of eta(U) over the mesh."""
    eta, _ = entropy_pair_prim(cons_to_prim(field_.U, eos), eos.gamma)
    return float(np.sum(field_.quadrature_weights() * eta))


# ---------------------------------------------------------------------------
# Neighbours and ghosts
# ---------------------------------------------------------------------------

def neighbor_cells(A, mesh: Mesh, direction: int, side: int, frozen=None, nodal: bool = True):
    """
    Array shaped like A whose cell i holds the data of the neighbour at
    i + side along `direction`; ghost cells follow the boundary rule.
    With nodal data, outflow and dirichlet ghosts are constant cells equal to
    the boundary trace; with per-cell data (nodal=False) they copy the cell.
    """
    bc = mesh.boundaries[direction][0 if side < 0 else 1]
    front = np.moveaxis(A, direction, 0)
    out = np.roll(front, -side, axis=0)
    edge = -1 if side > 0 else 0
    node_axis = mesh.dimension + direction - 1

    if bc.kind in ("outflow", "dirichlet"):
        if bc.kind == "dirichlet":
            if frozen is None:
                raise ConfigError("Dirichlet boundary needs frozen boundary data")
            source = np.moveaxis(frozen, direction, 0)
        else:
            source = front
        cell = source[edge]
        if nodal:
            trace = np.take(cell, [edge], axis=node_axis)
            out[edge] = np.broadcast_to(trace, cell.shape)
        else:
            out[edge] = cell
    elif bc.kind == "shifted":
        row = front[0] if side > 0 else front[-1]
        nx = row.shape[0]
        cols = np.clip(np.arange(nx) + side * bc.offset, 0, nx - 1)
        out[edge] = row[cols]
    return np.moveaxis(out, 0, direction)


def _stacked_frozen(field_: DGField):
    if field_.frozen is None:
        return None
    return np.concatenate([field_.frozen, field_.frozen_prim], axis=-1)


# ---------------------------------------------------------------------------
# Semi-discretisation
# ---------------------------------------------------------------------------

def _interface_flux(direction, UL, PL, UR, PR, eos: EosParams, flux_mode, signal_speed):
    gamma = eos.gamma
    if flux_mode == "ec":
        return ec_flux_params(direction, parameter_vector(PL), parameter_vector(PR), gamma)
    FL = flux_from_prim(PL, direction, gamma)
    FR = flux_from_prim(PR, direction, gamma)
    alpha = np.maximum(max_signal_speed(UL, eos, direction, signal_speed, P=PL),
                       max_signal_speed(UR, eos, direction, signal_speed, P=PR))
    return lax_friedrichs(FL, FR, UL, UR, alpha)


def _apply_along(D, A, axis):
    """Contract the node axis `axis` of A with D: (D A)[.., l, ..] = sum_p D[l, p] A[.., p, ..]."""
    return np.moveaxis(np.tensordot(D, np.moveaxis(A, axis, 0), axes=(1, 0)), 0, axis)


def _sweep(field_: DGField, P, Q, dphi, eos: EosParams, direction: int, flux_mode: str, signal_speed: str):
    """Tendency contributed by the derivative along one coordinate direction."""
    mesh, op, U = field_.mesh, field_.op, field_.U
    gamma = eos.gamma
    node_axis = mesh.dimension + direction
    h = mesh.spacing[direction]
    n = op.n
    bslot = BX + direction

    # Volume flux differencing.
    F_pair = ec_flux_params(direction, np.expand_dims(Q, node_axis), np.expand_dims(Q, node_axis + 1), gamma)
    D_shape = [1] * F_pair.ndim
    D_shape[node_axis] = D_shape[node_axis + 1] = n
    volume = np.sum(op.Dmat.reshape(D_shape) * F_pair, axis=node_axis + 1)
    tendency = -(4.0 / h) * volume

    # Non-conservative source.
    dB = _apply_along(op.Dmat, U[..., bslot], node_axis)
    tendency -= (2.0 / h) * dphi * dB[..., None]

    # Interfaces.
    stacked = np.concatenate([U, P], axis=-1)
    frozen = _stacked_frozen(field_)
    ghost_lo = np.take(neighbor_cells(stacked, mesh, direction, -1, frozen), -1, axis=node_axis)
    ghost_hi = np.take(neighbor_cells(stacked, mesh, direction, +1, frozen), 0, axis=node_axis)
    G_lo, PG_lo = ghost_lo[..., :NVARS], ghost_lo[..., NVARS:]
    G_hi, PG_hi = ghost_hi[..., :NVARS], ghost_hi[..., NVARS:]

    U_lo, U_hi = np.take(U, 0, axis=node_axis), np.take(U, -1, axis=node_axis)
    P_lo, P_hi = np.take(P, 0, axis=node_axis), np.take(P, -1, axis=node_axis)
    phi_lo, phi_hi = np.take(dphi, 0, axis=node_axis), np.take(dphi, -1, axis=node_axis)

    F_star_lo = _interface_flux(direction, G_lo, PG_lo, U_lo, P_lo, eos, flux_mode, signal_speed)
    F_star_hi = _interface_flux(direction, U_hi, P_hi, G_hi, PG_hi, eos, flux_mode, signal_speed)
    jump_lo = U_lo[..., bslot] - G_lo[..., bslot]
    jump_hi = G_hi[..., bslot] - U_hi[..., bslot]

    corr_lo = -(2.0 / (h * op.weights[0])) * (
        flux_from_prim(P_lo, direction, gamma) - F_star_lo + 0.5 * phi_lo * jump_lo[..., None])
    corr_hi = (2.0 / (h * op.weights[-1])) * (
        flux_from_prim(P_hi, direction, gamma) - F_star_hi - 0.5 * phi_hi * jump_hi[..., None])

    lead = (slice(None),) * node_axis
    tendency[lead + (0,)] += corr_lo
    tendency[lead + (n - 1,)] += corr_hi
    return tendency


def _check_signal_speed(signal_speed: str):
    if signal_speed not in SIGNAL_SPEEDS:
        raise ConfigError(f"Unknown signal speed estimate: {signal_speed}")


def rhs(field_: DGField, eos: EosParams, flux_mode: str = "es", signal_speed: str = "light") -> np.ndarray:
    """
    dU/dt of the entropy stable nodal DG scheme (flux_mode "es") or of the
    fully entropy conservative variant with the two-point flux on interfaces
    as well (flux_mode "ec", smooth diagnostics only).
    signal_speed picks the dissipation bound on interfaces: "light" uses 1,
    "fast" the fast magnetosonic estimate of the two traces.
    """
    if flux_mode not in FLUX_MODES:
        raise ConfigError(f"Unknown flux mode: {flux_mode}")
    _check_signal_speed(signal_speed)
    P = cons_to_prim(field_.U, eos)
    Q = parameter_vector(P)
    dphi = phi_prime(entropy_variables_prim(P, eos.gamma))
    tendency = np.zeros_like(field_.U)
    for direction in range(field_.mesh.dimension):
        tendency += _sweep(field_, P, Q, dphi, eos, direction, flux_mode, signal_speed)
    return tendency


def rhs_1d(field_: DGField, eos: EosParams, flux_mode: str = "es", signal_speed: str = "light") -> np.ndarray:
    if field_.mesh.dimension != 1:
        raise ConfigError("rhs_1d needs a one-dimensional field")
    return rhs(field_, eos, flux_mode, signal_speed)


def rhs_2d(field_: DGField, eos: EosParams, flux_mode: str = "es", signal_speed: str = "light") -> np.ndarray:
    if field_.mesh.dimension != 2:
        raise ConfigError("rhs_2d needs a two-dimensional field")
    return rhs(field_, eos, flux_mode, signal_speed)


# ---------------------------------------------------------------------------
# Time stepping
# ---------------------------------------------------------------------------

def compute_dt(field_: DGField, cfl: float, eos: Optional[EosParams] = None, signal_speed: str = "light") -> float:
    """dt = cfl * min(spacing) / max signal speed."""
    if cfl <= 0.0:
        raise ConfigError(f"CFL number must be positive, got {cfl}")
    if field_.U.size == 0:
        raise ConfigError("Cannot compute a time step for an empty field")
    _check_signal_speed(signal_speed)
    alpha = float(np.max(max_signal_speed(field_.U, eos, None, signal_speed)))
    return cfl * min(field_.mesh.spacing) / max(alpha, 1e-12)


def ssp_rk3_step(U, dt: float, rhs_fn: Callable, limiter: Optional[Callable] = None):
    """Three-stage third-order SSP Runge-Kutta step; limiter applied after each stage."""
    if dt <= 0.0:
        raise ConfigError(f"Time step must be positive, got {dt}")
    limit = limiter if limiter is not None else (lambda V: V)
    U1 = limit(U + dt * rhs_fn(U))
    U2 = limit(0.75 * U + 0.25 * (U1 + dt * rhs_fn(U1)))
    return limit(U / 3.0 + 2.0 / 3.0 * (U2 + dt * rhs_fn(U2)))


def _guarded_attempts(advance, U, t, dt, step, entropy, slack, field_, eos):
    """
    Tries the step with dt, dt/2, ... until total entropy rises by at most
    slack * |entropy|. Limiter, recovery and blow-up failures count as a
    rejected attempt until the halvings run out.
    Returns (U_new, new_entropy, dt, halvings).
    """
    halvings = 0
    while True:
        try:
            U_new = advance(U, t, dt, step)
            new_entropy = domain_entropy(field_.with_values(U_new), eos)
        except (LimiterError, RecoveryError, NumericalBlowupError) as exc:
            if halvings >= ENTROPY_MAX_HALVINGS:
                raise
            logger.debug("step %d rejected at dt=%.3e: %s", step, dt, exc)
        else:
            if new_entropy - entropy <= slack * abs(entropy) or halvings >= ENTROPY_MAX_HALVINGS:
                return U_new, new_entropy, dt, halvings
        dt *= 0.5
        halvings += 1


@dataclass
class IntegrationResult:
    field: DGField
    steps: int
    rejected: int = 0


def integrate(field_: DGField, eos: EosParams, t_end: float, cfl: float = 0.2,
              limiter: Optional[Callable] = None, flux_mode: str = "es",
              on_step: Optional[Callable] = None, fixed_dt: Optional[float] = None,
              log_every: int = 100, signal_speed: str = "light",
              entropy_slack: Optional[float] = None) -> IntegrationResult:
    """
    Advances the field to t_end. `limiter` maps nodal arrays to limited arrays,
    `on_step(step, field)` observes each accepted step.

    With entropy_slack set (and no fixed_dt), a step whose total entropy rises
    by more than entropy_slack * |previous total|, or that fails in the limiter
    or the recovery, is retried with half the time step, up to
    ENTROPY_MAX_HALVINGS times.
    """
    _check_signal_speed(signal_speed)

    def evaluate(V):
        return rhs(field_.with_values(V), eos, flux_mode, signal_speed)

    def advance(V, t, dt, step):
        out = ssp_rk3_step(V, dt, evaluate, limiter)
        if not np.all(np.isfinite(out)):
            bad = np.argwhere(~np.isfinite(out))[0]
            raise NumericalBlowupError(f"Non-finite state at index {tuple(bad)} after step {step}, t={t + dt:.6g}")
        return out

    guarded = entropy_slack is not None and fixed_dt is None
    U = field_.U
    t = field_.t
    steps = rejected = 0
    entropy = domain_entropy(field_, eos) if guarded else None
    if on_step is not None:
        on_step(0, field_)
    while t < t_end * (1.0 - 1e-14):
        if fixed_dt is not None:
            dt = fixed_dt
        else:
            dt = compute_dt(field_.with_values(U), cfl, eos, signal_speed)
        dt = min(dt, t_end - t)
        if guarded:
            U_new, new_entropy, dt, halvings = _guarded_attempts(advance, U, t, dt, steps + 1, entropy,
                                                                 entropy_slack, field_, eos)
            rejected += halvings
            if new_entropy - entropy > entropy_slack * abs(entropy):
                logger.warning("Total entropy still rises by %.3e at t=%.6g after %d halvings",
                               new_entropy - entropy, t + dt, halvings)
            entropy = new_entropy
        else:
            U_new = advance(U, t, dt, steps + 1)
        U = U_new
        t += dt
        steps += 1
        current = field_.with_values(U, t)
        if on_step is not None:
            on_step(steps, current)
        if log_every and steps % log_every == 0:
            total = entropy if guarded else domain_entropy(current, eos)
            logger.info("step %d  t=%.6g  dt=%.3e  entropy=%.16e", steps, t, dt, total)
    if rejected:
        logger.info("entropy guard rejected %d step(s)", rejected)
    return IntegrationResult(field=field_.with_values(U, t), steps=steps, rejected=rejected)


# ---------------------------------------------------------------------------
# Reference solver
# ---------------------------------------------------------------------------

def fv_reference_solve(problem, cells: int, t_end: Optional[float] = None, cfl: float = 0.4):
    """
    First-order Lax-Friedrichs finite volumes on `cells` uniform cells of a
    1D problem. Returns (cell centres, conserved cell values).
    """
    if problem.dimension != 1:
        raise ConfigError("The finite-volume reference solver is one-dimensional")
    t_end = problem.t_end if t_end is None else t_end
    eos = problem.eos
    mesh = uniform_mesh((cells,), problem.lower, problem.upper, problem.boundaries)
    x = mesh.cell_centers()[0]
    U = prim_to_cons(np.asarray(problem.initial(x), dtype=float), eos)
    U0 = U.copy()
    dx = mesh.spacing[0]
    low, high = mesh.boundaries[0]

    def ghost(side_bc, interior, initial):
        if side_bc.kind == "periodic":
            return None
        return interior if side_bc.kind == "outflow" else initial

    t = 0.0
    steps = 0
    while t < t_end * (1.0 - 1e-14):
        dt = min(cfl * dx / float(np.max(max_signal_speed(U))), t_end - t)
        left = ghost(low, U[0], U0[0])
        right = ghost(high, U[-1], U0[-1])
        if left is None:
            left, right = U[-1], U[0]
        UL = np.concatenate([left[None], U])
        UR = np.concatenate([U, right[None]])
        PL = cons_to_prim(UL, eos)
        PR = cons_to_prim(UR, eos)
        alpha = np.maximum(max_signal_speed(UL), max_signal_speed(UR))
        F = lax_friedrichs(flux_from_prim(PL, 0, eos.gamma), flux_from_prim(PR, 0, eos.gamma), UL, UR, alpha)
        U = U - (dt / dx) * (F[1:] - F[:-1])
        t += dt
        steps += 1
    logger.info("reference solve: %d cells, %d steps to t=%.4g", cells, steps, t)
    return x, U
