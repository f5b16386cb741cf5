"""
Two-point numerical fluxes.
Logarithmic mean, the entropy conservative flux (exact zero in the slot of the
magnetic component parallel to the flux direction) and the Lax-Friedrichs
entropy stable interface flux, plus entropy-balance helpers used by the
flux property suite.
"""
import logging
from dataclasses import dataclass

import numpy as np

from core.errors import FluxInvariantError, InadmissibleStateError
from core.physics import (
    EosParams, NVARS, RHO, PRES, VELOCITY, FIELD, BX,
    cons_to_prim, entropy_potential_prim, entropy_variables_prim,
    flux_from_prim, max_signal_speed, phi,
)

logger = logging.getLogger(__name__)

LOG_MEAN_SERIES_CUTOFF = 1e-4
SYSTEM_CHECK_TOL = 1e-12

# Parameter vector layout: (rho, beta = rho/p, ux, uy, uz, bx, by, bz, W)
NPARAMS = 9
P_RHO, P_BETA = 0, 1
P_U = slice(2, 5)
P_B = slice(5, 8)
P_W = 8


def _cyclic(direction):
    return np.roll(np.arange(3), -direction)


def _param_index(direction):
    perm = _cyclic(direction)
    return np.concatenate(([P_RHO, P_BETA], 2 + perm, 5 + perm, [P_W]))


def _flux_back_index(direction):
    perm = _cyclic(direction)
    back = np.empty(NVARS, dtype=int)
    back[0], back[4] = 0, 4
    back[1 + perm] = 1 + np.arange(3)
    back[5 + perm] = 5 + np.arange(3)
    return back


_PARAM_INDEX = [_param_index(d) for d in range(3)]
_FLUX_BACK = [_flux_back_index(d) for d in range(3)]


def _log_mean(a_left, a_right):
    zeta = (a_left - a_right) / (a_left + a_right)
    z2 = zeta * zeta
    series = 0.5 * (a_left + a_right) / (1.0 + z2 * (1.0 / 3.0 + z2 * (0.2 + z2 / 7.0)))
    with np.errstate(divide="ignore", invalid="ignore"):
        closed = (a_left - a_right) / (np.log(a_left) - np.log(a_right))
    return np.where(z2 < LOG_MEAN_SERIES_CUTOFF, series, closed)


def log_mean(a_left, a_right):
    """
    Logarithmic mean (aL - aR) / (ln aL - ln aR).
    A series in zeta = (aL - aR)/(aL + aR) replaces the quotient near aL = aR.
    """
    a_left = np.asarray(a_left, dtype=float)
    a_right = np.asarray(a_right, dtype=float)
    if np.any(a_left <= 0.0) or np.any(a_right <= 0.0):
        raise InadmissibleStateError("Logarithmic mean requires positive arguments")
    return _log_mean(a_left, a_right)


def parameter_vector(P):
    """(rho, rho/p, u, b, W) for primitive states, shape (..., 9)."""
    rho, p = P[..., RHO], P[..., PRES]
    v, B = P[..., VELOCITY], P[..., FIELD]
    W = 1.0 / np.sqrt(1.0 - np.sum(v * v, axis=-1))
    vB = np.sum(v * B, axis=-1)
    u = W[..., None] * v

    Q = np.empty(P.shape[:-1] + (NPARAMS,))
    Q[..., P_RHO] = rho
    Q[..., P_BETA] = rho / p
    Q[..., P_U] = u
    Q[..., P_B] = B / W[..., None] + u * vB[..., None]
    Q[..., P_W] = W
    return Q


@dataclass
class FluxPairMeans:
    """Averages and coefficients entering the x-direction entropy conservative flux."""
    rho_ln: np.ndarray
    beta_ln: np.ndarray
    rho: np.ndarray
    beta: np.ndarray
    u: np.ndarray
    b: np.ndarray
    W: np.ndarray
    bsq_perp: np.ndarray
    beta_u: np.ndarray
    beta_ub_over_W: np.ndarray
    beta_ux_over_W2: np.ndarray
    ux_over_beta: np.ndarray
    Wbx: np.ndarray
    alpha0: np.ndarray
    alpha1: np.ndarray
    tau: np.ndarray
    Dcal: np.ndarray


def pair_means(q_left, q_right, gamma) -> FluxPairMeans:
    """Means of the parameter vectors of two states (x-direction frame)."""
    rho_l, rho_r = q_left[..., P_RHO], q_right[..., P_RHO]
    beta_l, beta_r = q_left[..., P_BETA], q_right[..., P_BETA]
    u_l, u_r = q_left[..., P_U], q_right[..., P_U]
    b_l, b_r = q_left[..., P_B], q_right[..., P_B]
    W_l, W_r = q_left[..., P_W], q_right[..., P_W]

    beta_ln = _log_mean(beta_l, beta_r)
    beta = 0.5 * (beta_l + beta_r)
    u = 0.5 * (u_l + u_r)
    W = 0.5 * (W_l + W_r)
    W2 = 0.5 * (W_l * W_l + W_r * W_r)

    ub_l = np.sum(u_l * b_l, axis=-1)
    ub_r = np.sum(u_r * b_r, axis=-1)

    return FluxPairMeans(
        rho_ln=_log_mean(rho_l, rho_r),
        beta_ln=beta_ln,
        rho=0.5 * (rho_l + rho_r),
        beta=beta,
        u=u,
        b=0.5 * (b_l + b_r),
        W=W,
        bsq_perp=0.25 * (b_l[..., 1] ** 2 + b_r[..., 1] ** 2 + b_l[..., 2] ** 2 + b_r[..., 2] ** 2),
        beta_u=0.5 * (beta_l[..., None] * u_l + beta_r[..., None] * u_r),
        beta_ub_over_W=0.5 * ((beta_l / W_l)[..., None] * u_l * b_l + (beta_r / W_r)[..., None] * u_r * b_r),
        beta_ux_over_W2=0.5 * (beta_l * u_l[..., 0] / (W_l * W_l) + beta_r * u_r[..., 0] / (W_r * W_r)),
        ux_over_beta=0.5 * (u_l[..., 0] / beta_l + u_r[..., 0] / beta_r),
        Wbx=0.5 * (W_l * b_l[..., 0] + W_r * b_r[..., 0]),
        alpha0=1.0 / ((gamma - 1.0) * beta_ln) + 1.0,
        alpha1=b_l[..., 0] * b_r[..., 0] * W_l * W_r / (2.0 * W2),
        tau=ub_l * ub_r * beta_l * beta_r / (2.0 * W_l * W_r * beta),
        Dcal=beta * (W * W - np.sum(u * u, axis=-1)) / W,
    )


def _right_hand_sides(M: FluxPairMeans, F1, F7, F8):
    """Right-hand sides of the 4x4 system for (F2, F3, F4, F5)."""
    ux, uy, uz = M.u[..., 0], M.u[..., 1], M.u[..., 2]
    by, bz = M.b[..., 1], M.b[..., 2]
    k = M.Wbx / M.W
    s_perp = M.beta_ub_over_W[..., 1] + M.beta_ub_over_W[..., 2]
    two_a1 = 2.0 * M.alpha1 * M.beta_ux_over_W2

    R1 = (-M.alpha0 * F1 - M.alpha1 * ux + M.bsq_perp * ux
          - k * (by * uy + bz * uz) + M.tau * M.ux_over_beta - by * F7 - bz * F8)
    R2 = (M.rho - M.alpha1 * M.beta + two_a1 * ux + M.bsq_perp * M.beta
          + k * s_perp * ux / M.W - M.tau)
    R3 = two_a1 * uy - k * (M.beta * by - s_perp * uy / M.W)
    R4 = two_a1 * uz - k * (M.beta * bz - s_perp * uz / M.W)
    return R1, R2, R3, R4


def _check_system(M: FluxPairMeans, F, R):
    """Substitute (F2..F5) back into the 4x4 system."""
    ux, uy, uz = M.u[..., 0], M.u[..., 1], M.u[..., 2]
    beta, W = M.beta, M.W
    residuals = [
        ux * F[..., 1] + uy * F[..., 2] + uz * F[..., 3] - W * F[..., 4] - R[0],
        beta * F[..., 1] - beta * ux / W * F[..., 4] - R[1],
        beta * F[..., 2] - beta * uy / W * F[..., 4] - R[2],
        beta * F[..., 3] - beta * uz / W * F[..., 4] - R[3],
    ]
    scale = 1.0 + np.abs(np.stack(R, axis=-1)).max(axis=-1) + np.abs(F[..., 1:5]).max(axis=-1) * (beta + W)
    worst = max(float(np.max(np.abs(r) / scale)) for r in residuals)
    if worst > SYSTEM_CHECK_TOL:
        raise FluxInvariantError(f"Entropy conservative flux fails its linear system: residual {worst:.3e}")


def _ec_flux_x(q_left, q_right, gamma, check_system=False):
    M = pair_means(q_left, q_right, gamma)
    if np.any(M.Dcal <= 0.0):
        raise FluxInvariantError("Non-positive denominator in the entropy conservative flux")

    ux, uy, uz = M.u[..., 0], M.u[..., 1], M.u[..., 2]
    k = M.Wbx / M.W

    F = np.empty(M.rho.shape + (NVARS,))
    F1 = M.rho_ln * ux
    F7 = (M.beta_u[..., 0] * M.b[..., 1] - k * M.beta_u[..., 1]) / M.beta
    F8 = (M.beta_u[..., 0] * M.b[..., 2] - k * M.beta_u[..., 2]) / M.beta

    R1, R2, R3, R4 = _right_hand_sides(M, F1, F7, F8)
    F5 = (ux * R2 + uy * R3 + uz * R4 - M.beta * R1) / M.Dcal

    F[..., 0] = F1
    F[..., 1] = ux * F5 / M.W + R2 / M.beta
    F[..., 2] = uy * F5 / M.W + R3 / M.beta
    F[..., 3] = uz * F5 / M.W + R4 / M.beta
    F[..., 4] = F5
    F[..., 5] = 0.0
    F[..., 6] = F7
    F[..., 7] = F8

    if check_system:
        _check_system(M, F, (R1, R2, R3, R4))
    return F


def ec_flux_params(direction: int, q_left, q_right, gamma: float, check_system: bool = False):
    """
    Entropy conservative flux from parameter vectors (see parameter_vector).
    Other directions permute (x, y, z) cyclically, call the x kernel and
    permute momentum and field components back.
    """
    if direction == 0:
        return _ec_flux_x(q_left, q_right, gamma, check_system)
    index = _PARAM_INDEX[direction]
    F = _ec_flux_x(q_left[..., index], q_right[..., index], gamma, check_system)
    return F[..., _FLUX_BACK[direction]]


def ec_flux(direction: int, UL, UR, eos: EosParams, check_system: bool = False):
    """
    Symmetric, consistent two-point flux satisfying
    [V].F = [psi_d] - [Phi] <B_d>, with F exactly zero in the B_d slot.
    """
    PL = cons_to_prim(UL, eos)
    PR = cons_to_prim(UR, eos)
    return ec_flux_params(direction, parameter_vector(PL), parameter_vector(PR), eos.gamma, check_system)


def lax_friedrichs(F_left, F_right, U_left, U_right, alpha):
    """0.5 (F_L + F_R) - 0.5 alpha (U_R - U_L)."""
    alpha = np.asarray(alpha, dtype=float)
    return 0.5 * (F_left + F_right) - 0.5 * alpha[..., None] * (U_right - U_left)


def es_flux(direction: int, UL, UR, eos: EosParams):
    """Lax-Friedrichs interface flux with the light-speed dissipation bound."""
    UL = np.asarray(UL, dtype=float)
    UR = np.asarray(UR, dtype=float)
    FL = flux_from_prim(cons_to_prim(UL, eos), direction, eos.gamma)
    FR = flux_from_prim(cons_to_prim(UR, eos), direction, eos.gamma)
    alpha = np.maximum(max_signal_speed(UL), max_signal_speed(UR))
    return lax_friedrichs(FL, FR, UL, UR, alpha)


def entropy_balance(direction: int, UL, UR, F, eos: EosParams):
    """
    Terms of the two-point entropy balance for a candidate flux F:
    returns ([V].F, [psi_d], [Phi] <B_d>).
    """
    PL = cons_to_prim(UL, eos)
    PR = cons_to_prim(UR, eos)
    VL = entropy_variables_prim(PL, eos.gamma)
    VR = entropy_variables_prim(PR, eos.gamma)
    dV_F = np.sum((VR - VL) * F, axis=-1)
    d_psi = entropy_potential_prim(PR, direction, eos.gamma) - entropy_potential_prim(PL, direction, eos.gamma)
    B_mean = 0.5 * (PL[..., BX + direction] + PR[..., BX + direction])
    d_phi_B = (phi(VR) - phi(VL)) * B_mean
    return dV_F, d_psi, d_phi_B


def ec_condition_residual(direction: int, UL, UR, eos: EosParams, flux=None):
    """[V].F - [psi_d] + [Phi] <B_d> for the entropy conservative flux (or a supplied F)."""
    F = ec_flux(direction, UL, UR, eos) if flux is None else flux
    dV_F, d_psi, d_phi_B = entropy_balance(direction, UL, UR, F, eos)
    return dV_F - d_psi + d_phi_B


def es_entropy_production(direction: int, UL, UR, eos: EosParams):
    """[V].F_hat + [Phi] <B_d> - [psi_d]; non-positive for an entropy stable flux."""
    F = es_flux(direction, UL, UR, eos)
    dV_F, d_psi, d_phi_B = entropy_balance(direction, UL, UR, F, eos)
    return dV_F + d_phi_B - d_psi
