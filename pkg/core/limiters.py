"""
Limiters applied after every Runge-Kutta stage.
KXRCF trouble-cell indicator, TVB slope limiter (componentwise or on local
characteristic fields) and the physical-constraints-preserving scaling limiter.
"""
import logging
from dataclasses import dataclass

import numpy as np

from core.errors import ConfigError, LimiterError
from core.physics import (
    DENS, BX, NVARS, PRES, VELOCITY, EosParams, cons_to_prim, entropy_pair_prim, flux_from_prim,
    recover_primitives,
)
from core.solver import DGField, neighbor_cells

logger = logging.getLogger(__name__)

PCP_BISECTION_STEPS = 40
JACOBIAN_STEP = 1e-7
INDICATORS = ("kxrcf", "all")


@dataclass(frozen=True)
class LimiterConfig:
    """
    enabled: master switch for the TVB stage (PCP always runs when pcp is True).
    indicator: "kxrcf" limits flagged cells only, "all" hands every cell to TVB.
    entropy_safe: pull TVB-rebuilt cells back toward their mean until the cell
    entropy is no larger than before limiting.
    """
    tvb_M: float = 10.0
    kxrcf_threshold: float = 1.0
    characteristic: bool = False
    pcp_epsilon: float = 1e-13
    enabled: bool = True
    indicator: str = "kxrcf"
    pcp: bool = True
    entropy_safe: bool = True

    def __post_init__(self):
        if self.tvb_M < 0.0:
            raise ConfigError(f"TVB constant must be non-negative, got {self.tvb_M}")
        if self.kxrcf_threshold <= 0.0:
            raise ConfigError(f"KXRCF threshold must be positive, got {self.kxrcf_threshold}")
        if not (0.0 < self.pcp_epsilon <= 1e-8):
            raise ConfigError(f"PCP epsilon must lie in (0, 1e-8], got {self.pcp_epsilon}")
        if self.indicator not in INDICATORS:
            raise ConfigError(f"Unknown trouble-cell indicator: {self.indicator}")


# ---------------------------------------------------------------------------
# KXRCF
# ---------------------------------------------------------------------------

def kxrcf_indicator(field_: DGField, eos: EosParams, threshold: float = 1.0) -> np.ndarray:
    """
    Boolean array over cells: True where the inflow-edge jump of D exceeds
    threshold * h^((r+1)/2) * |inflow edges| * max interior |D|.
    Edges with v.n <= 0 count as inflow.
    """
    mesh, op, U = field_.mesh, field_.op, field_.U
    dim = mesh.dimension
    cell_shape = U.shape[:dim]
    h = max(mesh.spacing)
    w = op.weights

    jump_sum = np.zeros(cell_shape)
    edge_measure = np.zeros(cell_shape)
    frozen = field_.frozen

    for direction in range(dim):
        node_axis = dim + direction
        face_len = mesh.spacing[1 - direction] if dim == 2 else 1.0
        for side in (-1, 1):
            own = np.take(U, 0 if side < 0 else -1, axis=node_axis)
            nb = np.take(neighbor_cells(U, mesh, direction, side, frozen), -1 if side < 0 else 0, axis=node_axis)
            P_own, _ = recover_primitives(own, eos)
            v_normal = np.nan_to_num(side * P_own[..., 1 + direction])
            jump = own[..., DENS] - nb[..., DENS]
            if dim == 2:
                quad = 0.5 * face_len * w
                inflow = np.einsum("m,ijm->ij", quad, v_normal) <= 0.0
                integral = np.einsum("m,ijm->ij", quad, jump)
            else:
                inflow = v_normal <= 0.0
                integral = jump
            jump_sum += np.where(inflow, integral, 0.0)
            edge_measure += np.where(inflow, face_len, 0.0)

    norm = np.max(np.abs(U[..., DENS]).reshape(cell_shape + (-1,)), axis=-1)
    scale = threshold * h ** (0.5 * (op.r + 1)) * np.maximum(edge_measure, 1e-300) * norm
    return (np.abs(jump_sum) > scale) & (edge_measure > 0.0)


# ---------------------------------------------------------------------------
# TVB
# ---------------------------------------------------------------------------

def minmod_tvb(a1, a2, a3, bound):
    """Modified minmod: a1 when |a1| <= bound, otherwise the minmod of all three."""
    s = np.sign(a1)
    same = (np.sign(a2) == s) & (np.sign(a3) == s)
    mm = np.where(same, s * np.minimum(np.abs(a1), np.minimum(np.abs(a2), np.abs(a3))), 0.0)
    return np.where(np.abs(a1) <= bound, a1, mm)


def _modal_linear(field_: DGField, U):
    """Linear Legendre coefficients per direction, each shaped (cells..., 8)."""
    Vinv = field_.op.modal_inv
    if field_.mesh.dimension == 1:
        return [np.einsum("l,ilc->ic", Vinv[1], U)]
    return [
        np.einsum("l,m,ijlmc->ijc", Vinv[1], Vinv[0], U),
        np.einsum("l,m,ijlmc->ijc", Vinv[0], Vinv[1], U),
    ]


def _flux_jacobian(mean, direction, eos: EosParams):
    """Central finite-difference Jacobian of F_d at one conserved state."""
    J = np.empty((NVARS, NVARS))
    for k in range(NVARS):
        step = JACOBIAN_STEP * max(1.0, abs(mean[k]))
        plus, minus = mean.copy(), mean.copy()
        plus[k] += step
        minus[k] -= step
        Fp = flux_from_prim(cons_to_prim(plus, eos), direction, eos.gamma)
        Fm = flux_from_prim(cons_to_prim(minus, eos), direction, eos.gamma)
        J[:, k] = (Fp - Fm) / (2.0 * step)
    return J


def _characteristic_basis(mean, direction, eos: EosParams):
    """(R, L) from the numerical flux Jacobian, or None when the decomposition is unusable."""
    try:
        J = _flux_jacobian(mean, direction, eos)
        values, vectors = np.linalg.eig(J)
        order = np.argsort(values.real)
        R = vectors[:, order]
        if np.max(np.abs(R.imag)) > 1e-8 or np.linalg.cond(R.real) > 1e10:
            return None
        R = R.real
        return R, np.linalg.inv(R)
    except (np.linalg.LinAlgError, ValueError, ArithmeticError):
        return None


def tvb_limit(field_: DGField, troubled, config: LimiterConfig, eos: EosParams = None) -> np.ndarray:
    """
    Replaces the linear moment of each troubled cell with the TVB-modified
    minmod of itself and the forward/backward differences of cell means;
    when any slope is modified the cell becomes its mean plus limited slopes.
    """
    mesh, op, U = field_.mesh, field_.op, field_.U
    troubled = np.asarray(troubled, dtype=bool)
    if not np.any(troubled):
        return U

    dim = mesh.dimension
    means = field_.cell_means()
    slopes = _modal_linear(field_, U)
    frozen_means = field_.cell_means(field_.frozen) if field_.frozen is not None else None

    forward, backward = [], []
    for direction in range(dim):
        nb_hi = neighbor_cells(means, mesh, direction, +1, frozen_means, nodal=False)
        nb_lo = neighbor_cells(means, mesh, direction, -1, frozen_means, nodal=False)
        forward.append(nb_hi - means)
        backward.append(means - nb_lo)

    characteristic = config.characteristic and eos is not None
    out = U.copy()
    cells = np.argwhere(troubled)
    xi = op.nodes

    for cell in map(tuple, cells):
        mean = means[cell]
        limited = []
        modified = False
        for direction in range(dim):
            bound = config.tvb_M * mesh.spacing[direction] ** 2
            a1, a2, a3 = slopes[direction][cell], forward[direction][cell], backward[direction][cell]
            basis = _characteristic_basis(mean, direction, eos) if characteristic else None
            if characteristic and basis is None:
                logger.warning("Characteristic decomposition failed in cell %s; limiting componentwise", cell)
            if basis is not None:
                R, L = basis
                w1 = L @ a1
                w_new = minmod_tvb(w1, L @ a2, L @ a3, bound)
                changed = np.any(w_new != w1)
                new = R @ w_new
                # The normal field has a zero flux row; limit it on its own.
                b = BX + direction
                new[b] = minmod_tvb(a1[b], a2[b], a3[b], bound)
            else:
                new = minmod_tvb(a1, a2, a3, bound)
                changed = np.any(new != a1)
            modified |= bool(changed)
            limited.append(new)
        if not modified:
            continue
        if dim == 1:
            out[cell] = mean[None, :] + xi[:, None] * limited[0][None, :]
        else:
            out[cell] = (mean[None, None, :]
                         + xi[:, None, None] * limited[0][None, None, :]
                         + xi[None, :, None] * limited[1][None, None, :])
    return out


# ---------------------------------------------------------------------------
# Positivity
# ---------------------------------------------------------------------------

def admissible(U, eos: EosParams, epsilon: float) -> np.ndarray:
    """Recovery succeeds with D >= eps, p >= eps and |v|^2 <= 1 - eps."""
    P, ok = recover_primitives(U, eos)
    with np.errstate(invalid="ignore"):
        v2 = np.sum(P[..., VELOCITY] ** 2, axis=-1)
        ok = ok & (U[..., DENS] >= epsilon) & (P[..., PRES] >= epsilon) & (v2 <= 1.0 - epsilon)
    return ok


def pcp_limit(field_: DGField, eos: EosParams, epsilon: float = 1e-13) -> np.ndarray:
    """
    Scales each cell toward its average, U~ = theta (U - U_bar) + U_bar, with
    the largest theta in [0, 1] (bisection) keeping every node admissible.
    """
    U = field_.U
    dim = field_.mesh.dimension
    means = field_.cell_means()
    mean_ok = admissible(means, eos, epsilon)
    if not np.all(mean_ok):
        bad = tuple(np.argwhere(~mean_ok)[0])
        raise LimiterError(f"Inadmissible cell average in cell {bad} at t={field_.t:.6g}")

    node_ok = admissible(U, eos, epsilon)
    cell_ok = node_ok.reshape(node_ok.shape[:dim] + (-1,)).all(axis=-1)
    if np.all(cell_ok):
        return U

    out = U.copy()
    cells = np.argwhere(~cell_ok)
    index = tuple(cells.T)
    nodes = U[index]                     # (k, nodes..., 8)
    bar = means[index]
    bar_b = bar.reshape(bar.shape[:1] + (1,) * dim + bar.shape[1:])
    delta = nodes - bar_b

    lo = np.zeros(nodes.shape[:-1])
    hi = np.ones(nodes.shape[:-1])
    good = admissible(nodes, eos, epsilon)
    lo[good] = 1.0
    for _ in range(PCP_BISECTION_STEPS):
        mid = 0.5 * (lo + hi)
        trial = bar_b + mid[..., None] * delta
        ok = admissible(trial, eos, epsilon) | good
        lo = np.where(ok, mid, lo)
        hi = np.where(ok, hi, mid)
    theta = lo.reshape(lo.shape[0], -1).min(axis=1)
    theta_b = theta.reshape((-1,) + (1,) * (dim + 1))
    out[index] = bar_b + theta_b * delta
    logger.debug("PCP limiter rescaled %d cell(s), min theta %.3e", len(cells), float(theta.min()))
    return out


# ---------------------------------------------------------------------------
# Entropy-safe blend
# ---------------------------------------------------------------------------

def _node_weights(op, dim: int) -> np.ndarray:
    w = op.weights
    return w if dim == 1 else w[:, None] * w[None, :]


def _cell_entropy(V, eos: EosParams, epsilon: float, weights, dim: int):
    """(weighted entropy sum, all nodes admissible) per cell of a (cells, nodes..., 8) block."""
    ok = admissible(V, eos, epsilon)
    P, _ = recover_primitives(V, eos)
    with np.errstate(all="ignore"):
        eta, _ = entropy_pair_prim(P, eos.gamma)
        eta = np.where(ok, eta, 0.0)
    node_axes = tuple(range(1, dim + 1))
    return np.sum(weights * eta, axis=node_axes), ok.all(axis=node_axes)


def entropy_safe_blend(field_: DGField, limited, eos: EosParams, epsilon: float = 1e-13) -> np.ndarray:
    """
    For every cell the slope limiter rebuilt, moves the rebuilt polynomial
    toward the cell mean, U~ = U_bar + theta (U_tvb - U_bar), with the largest
    theta in [0, 1] whose cell entropy does not exceed that of field_.U.
    Cells whose unlimited data cannot be recovered are left to the PCP stage.
    """
    U = field_.U
    dim = field_.mesh.dimension
    changed = np.any((limited != U).reshape(U.shape[:dim] + (-1,)), axis=-1)
    if not np.any(changed):
        return limited

    index = tuple(np.argwhere(changed).T)
    bar = field_.cell_means()[index]
    bar_b = bar.reshape(bar.shape[:1] + (1,) * dim + bar.shape[1:])
    delta = limited[index] - bar_b
    weights = _node_weights(field_.op, dim)

    ref_S, ref_ok = _cell_entropy(U[index], eos, epsilon, weights, dim)
    lim_S, lim_ok = _cell_entropy(limited[index], eos, epsilon, weights, dim)
    done = ~ref_ok | (lim_ok & (lim_S <= ref_S))
    if np.all(done):
        return limited

    lo = np.where(done, 1.0, 0.0)
    hi = np.ones_like(lo)
    for _ in range(PCP_BISECTION_STEPS):
        mid = 0.5 * (lo + hi)
        trial = bar_b + mid.reshape((-1,) + (1,) * (dim + 1)) * delta
        S, ok = _cell_entropy(trial, eos, epsilon, weights, dim)
        feasible = done | (ok & (S <= ref_S))
        lo = np.where(feasible, mid, lo)
        hi = np.where(feasible, hi, mid)

    theta = np.where(done, 1.0, lo)
    out = limited.copy()
    out[index] = bar_b + theta.reshape((-1,) + (1,) * (dim + 1)) * delta
    logger.debug("Entropy blend pulled back %d cell(s), min theta %.3e",
                 int(np.count_nonzero(~done)), float(theta.min()))
    return out


# ---------------------------------------------------------------------------
# Pipeline
# ---------------------------------------------------------------------------

class LimiterPipeline:
    """
    Callable applied to nodal arrays after each stage:
    indicator -> TVB on troubled cells -> entropy-safe blend -> PCP scaling.
    """

    def __init__(self, template: DGField, config: LimiterConfig, eos: EosParams):
        self.template = template
        self.config = config
        self.eos = eos
        self.flagged_total = 0

    def troubled_cells(self, field_: DGField) -> np.ndarray:
        cell_shape = field_.U.shape[:field_.mesh.dimension]
        if self.config.indicator == "all":
            return np.ones(cell_shape, dtype=bool)
        return kxrcf_indicator(field_, self.eos, self.config.kxrcf_threshold)

    def __call__(self, U):
        field_ = self.template.with_values(U)
        if self.config.enabled:
            troubled = self.troubled_cells(field_)
            self.flagged_total += int(np.count_nonzero(troubled))
            U = tvb_limit(field_, troubled, self.config, self.eos)
            if self.config.entropy_safe:
                U = entropy_safe_blend(field_, U, self.eos, self.config.pcp_epsilon)
            field_ = field_.with_values(U)
        if self.config.pcp:
            U = pcp_limit(field_, self.eos, self.config.pcp_epsilon)
        return U
