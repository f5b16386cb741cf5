"""
RMHD state algebra.
Ideal-gas equation of state, primitive/conserved conversions, the entropy pair,
entropy variables, the Godunov-Powell potential and physical fluxes.

States are numpy arrays whose last axis holds 8 components:
    primitive  P = (rho, vx, vy, vz, p, Bx, By, Bz)
    conserved  U = (D, mx, my, mz, E, Bx, By, Bz)
All functions broadcast over the leading axes.
"""
import logging
from dataclasses import dataclass

import numpy as np

from core.errors import ConfigError, InadmissibleStateError, RecoveryError

logger = logging.getLogger(__name__)

NVARS = 8

# Primitive slots
RHO, VX, VY, VZ, PRES, BX, BY, BZ = range(NVARS)
# Conserved slots (magnetic slots are shared with the primitive layout)
DENS, MX, MY, MZ, ENER = range(5)

VELOCITY = slice(1, 4)
MOMENTUM = slice(1, 4)
FIELD = slice(5, 8)

RECOVERY_TOL = 1e-12
RECOVERY_MAX_ITER = 200

SIGNAL_SPEEDS = ("light", "fast")

_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class EosParams:
    """
    Ideal-gas equation of state p = (gamma - 1) rho e.
    """
    gamma: float = 5.0 / 3.0

    def __post_init__(self):
        if not (1.0 < self.gamma <= 2.0):
            raise InadmissibleStateError(f"Adiabatic index must lie in (1, 2], got {self.gamma}")

    @property
    def gamma_ratio(self) -> float:
        """Gamma / (Gamma - 1), the enthalpy coefficient."""
        return self.gamma / (self.gamma - 1.0)


@dataclass(frozen=True)
class AuxiliaryState:
    """Derived quantities of a primitive state (arrays broadcast like the input)."""
    W: np.ndarray
    u: np.ndarray
    b0: np.ndarray
    b: np.ndarray
    bsq: np.ndarray
    h: np.ndarray
    s: np.ndarray
    pt: np.ndarray


def _dot(a, b):
    return np.sum(a * b, axis=-1)


def lorentz_factor(v):
    """
    W = 1 / sqrt(1 - |v|^2) for velocity arrays of shape (..., 3).
    """
    v = np.asarray(v, dtype=float)
    v2 = _dot(v, v)
    if not np.all(np.isfinite(v2)) or np.any(v2 >= 1.0):
        raise InadmissibleStateError("Superluminal velocity: |v|^2 >= 1")
    return 1.0 / np.sqrt(1.0 - v2)


def check_primitive(P):
    """Raise InadmissibleStateError unless rho > 0, p > 0 and |v| < 1 everywhere."""
    P = np.asarray(P, dtype=float)
    if P.shape[-1] != NVARS:
        raise InadmissibleStateError(f"Expected {NVARS} components, got {P.shape[-1]}")
    if not np.all(np.isfinite(P)):
        raise InadmissibleStateError("Non-finite primitive state")
    v2 = _dot(P[..., VELOCITY], P[..., VELOCITY])
    if np.any(P[..., RHO] <= 0.0):
        raise InadmissibleStateError("Non-positive density")
    if np.any(P[..., PRES] <= 0.0):
        raise InadmissibleStateError("Non-positive pressure")
    if np.any(v2 >= 1.0):
        raise InadmissibleStateError("Superluminal velocity: |v|^2 >= 1")
    return P


def enthalpy(rho, p, eos: EosParams):
    """Specific enthalpy h = 1 + Gamma p / ((Gamma - 1) rho)."""
    return 1.0 + eos.gamma_ratio * p / rho


# ---------------------------------------------------------------------------
# Conversions
# ---------------------------------------------------------------------------

def _prim_to_cons(P, gamma):
    rho, p = P[..., RHO], P[..., PRES]
    v, B = P[..., VELOCITY], P[..., FIELD]
    v2 = _dot(v, v)
    W2 = 1.0 / (1.0 - v2)
    vB = _dot(v, B)
    B2 = _dot(B, B)
    rhohW2 = (rho + gamma / (gamma - 1.0) * p) * W2
    pt = p + 0.5 * (B2 / W2 + vB * vB)

    U = np.empty(np.broadcast(rho, P[..., 0]).shape + (NVARS,))
    U[..., DENS] = rho * np.sqrt(W2)
    U[..., MOMENTUM] = (rhohW2 + B2)[..., None] * v - vB[..., None] * B
    U[..., ENER] = rhohW2 - pt + B2
    U[..., FIELD] = B
    return U


def prim_to_cons(P, eos: EosParams):
    """
    D = rho W, m = (rho h W^2 + |B|^2) v - (v.B) B, E = rho h W^2 - pt + |B|^2.
    """
    P = check_primitive(P)
    return _prim_to_cons(P, eos.gamma)


def _recovery_residual(xi, D, E, m2, S2, B2, g):
    """Residual of the energy equation and its derivative in xi = rho h W^2."""
    xB = xi + B2
    num = m2 + S2 * (2.0 * xi + B2) / (xi * xi)
    v2 = num / (xB * xB)
    inside = v2 < 1.0
    v2c = np.where(inside, v2, 1.0 - _EPS)
    inv_w = np.sqrt(1.0 - v2c)

    p = g * (xi * (1.0 - v2c) - D * inv_w)
    f = xi - p + 0.5 * B2 * (1.0 + v2c) - 0.5 * S2 / (xi * xi) - E

    dnum = -2.0 * S2 * (1.0 / (xi * xi) + B2 / (xi * xi * xi))
    dv2 = dnum / (xB * xB) - 2.0 * num / (xB * xB * xB)
    dp = g * ((1.0 - v2c) - xi * dv2 + 0.5 * D * dv2 / inv_w)
    df = 1.0 - dp + 0.5 * B2 * dv2 + S2 / (xi * xi * xi)

    admissible = inside & (p > 0.0)
    return f, df, admissible


def recover_primitives(U, eos: EosParams, tol: float = RECOVERY_TOL, max_iter: int = RECOVERY_MAX_ITER):
    """
    Non-raising conserved-to-primitive recovery.

    Solves the energy equation for xi = rho h W^2 with Newton steps safeguarded
    by a bisection bracket [D, Gamma E]. Any trial xi giving |v| >= 1 or p <= 0
    lies below the admissible root.

    Returns:
        (P, ok): primitive array (NaN where recovery failed) and a boolean mask.
    """
    U = np.asarray(U, dtype=float)
    shape = U.shape[:-1]
    flat = U.reshape(-1, NVARS)
    gamma = eos.gamma
    g = (gamma - 1.0) / gamma

    with np.errstate(all="ignore"):
        D = flat[:, DENS]
        E = flat[:, ENER]
        m = flat[:, MOMENTUM]
        B = flat[:, FIELD]
        m2 = _dot(m, m)
        S = _dot(m, B)
        S2 = S * S
        B2 = _dot(B, B)

        valid = np.all(np.isfinite(flat), axis=1) & (D > 0.0) & (E > 0.0)
        D = np.where(valid, D, 1.0)
        E = np.where(valid, E, 1.0)
        m2 = np.where(valid, m2, 0.0)
        S2 = np.where(valid, S2, 0.0)
        B2 = np.where(valid, B2, 0.0)
        scale = E + B2 + D

        lo = D.copy()
        hi = gamma * E * (1.0 + 4.0 * _EPS)
        valid &= hi > lo
        xi = hi.copy()

        converged = np.zeros(valid.shape, dtype=bool)
        active = valid.copy()
        for _ in range(max_iter):
            idx = np.nonzero(active)[0]
            if idx.size == 0:
                break
            x = xi[idx]
            f, df, adm = _recovery_residual(x, D[idx], E[idx], m2[idx], S2[idx], B2[idx], g)

            below = ~adm | (f < 0.0)
            lo[idx] = np.where(below, x, lo[idx])
            hi[idx] = np.where(below, hi[idx], x)

            step = f / df
            newton = x - step
            use_newton = adm & (df > 0.0) & np.isfinite(newton) & (newton > lo[idx]) & (newton < hi[idx])
            x_new = np.where(use_newton, newton, 0.5 * (lo[idx] + hi[idx]))

            done = adm & (
                (np.abs(f) <= 4.0 * _EPS * scale[idx])
                | (use_newton & (np.abs(step) <= 4.0 * _EPS * x))
            )
            collapsed = (hi[idx] - lo[idx]) <= 4.0 * _EPS * hi[idx]
            done |= collapsed & adm & (np.abs(f) <= tol * scale[idx])

            xi[idx] = np.where(done, x, x_new)
            converged[idx] = done
            active[idx] = ~(done | collapsed)

        # Budget exhausted: accept anything that meets the loose tolerance.
        rest = valid & ~converged
        if np.any(rest):
            idx = np.nonzero(rest)[0]
            f, _, adm = _recovery_residual(xi[idx], D[idx], E[idx], m2[idx], S2[idx], B2[idx], g)
            converged[idx] = adm & (np.abs(f) <= tol * scale[idx])

        vB = S / xi
        v = (m + vB[:, None] * B) / (xi + B2)[:, None]
        v2 = _dot(v, v)
        W = 1.0 / np.sqrt(1.0 - v2)
        rho = D / W
        p = g * (xi / (W * W) - D / W)

        ok = valid & converged & (v2 < 1.0) & (rho > 0.0) & (p > 0.0)
        ok &= np.isfinite(rho) & np.isfinite(p) & np.all(np.isfinite(v), axis=1)

        P = np.empty_like(flat)
        P[:, RHO] = rho
        P[:, VELOCITY] = v
        P[:, PRES] = p
        P[:, FIELD] = flat[:, FIELD]
        P[~ok] = np.nan

    return P.reshape(shape + (NVARS,)), ok.reshape(shape)


def cons_to_prim(U, eos: EosParams):
    """
    Recovers (rho, v, p, B) from (D, m, E, B).
    Raises RecoveryError listing the failing states.
    """
    P, ok = recover_primitives(U, eos)
    if not np.all(ok):
        bad = np.flatnonzero(~ok.ravel())
        raise RecoveryError(
            f"Primitive recovery failed for {bad.size} state(s), first at flat index {bad[0]}",
            indices=bad[:32],
        )
    return P


# ---------------------------------------------------------------------------
# Derived quantities
# ---------------------------------------------------------------------------

def _auxiliaries(P, gamma):
    rho, p = P[..., RHO], P[..., PRES]
    v, B = P[..., VELOCITY], P[..., FIELD]
    W = 1.0 / np.sqrt(1.0 - _dot(v, v))
    vB = _dot(v, B)
    u = W[..., None] * v
    b = B / W[..., None] + u * vB[..., None]
    bsq = _dot(B, B) / (W * W) + vB * vB
    h = 1.0 + gamma / (gamma - 1.0) * p / rho
    s = np.log(p) - gamma * np.log(rho)
    return AuxiliaryState(W=W, u=u, b0=W * vB, b=b, bsq=bsq, h=h, s=s, pt=p + 0.5 * bsq)


def auxiliaries(P, eos: EosParams) -> AuxiliaryState:
    """Lorentz factor, four-velocity, covariant field b^alpha, enthalpy, entropy, total pressure."""
    P = check_primitive(P)
    return _auxiliaries(P, eos.gamma)


def entropy_pair_prim(P, gamma):
    """eta = -rho W s / (Gamma - 1) and q = eta v from primitives."""
    rho, p = P[..., RHO], P[..., PRES]
    v = P[..., VELOCITY]
    W = 1.0 / np.sqrt(1.0 - _dot(v, v))
    s = np.log(p) - gamma * np.log(rho)
    eta = -rho * W * s / (gamma - 1.0)
    return eta, eta[..., None] * v


def entropy_pair(U, eos: EosParams):
    P = cons_to_prim(U, eos)
    return entropy_pair_prim(P, eos.gamma)


def entropy_variables_prim(P, gamma):
    rho, p = P[..., RHO], P[..., PRES]
    v, B = P[..., VELOCITY], P[..., FIELD]
    W = 1.0 / np.sqrt(1.0 - _dot(v, v))
    vB = _dot(v, B)
    u = W[..., None] * v
    b = B / W[..., None] + u * vB[..., None]
    s = np.log(p) - gamma * np.log(rho)
    beta = rho / p

    V = np.empty(P.shape)
    V[..., 0] = (gamma - s) / (gamma - 1.0) + beta
    V[..., 1:4] = beta[..., None] * u
    V[..., 4] = -beta * W
    V[..., 5:8] = beta[..., None] * b
    return V


def entropy_variables(U, eos: EosParams):
    """V = eta'(U)^T."""
    P = cons_to_prim(U, eos)
    return entropy_variables_prim(P, eos.gamma)


def phi(V):
    """Godunov-Powell potential rho W (v.B) / p = -(V2 V6 + V3 V7 + V4 V8) / V5."""
    V = np.asarray(V, dtype=float)
    return -_dot(V[..., 1:4], V[..., 5:8]) / V[..., 4]


def phi_prime(V):
    """Gradient of phi: (0, b/W, v.B, v) expressed through V alone."""
    V = np.asarray(V, dtype=float)
    V5 = V[..., 4]
    out = np.zeros(V.shape)
    out[..., 1:4] = -V[..., 5:8] / V5[..., None]
    out[..., 4] = _dot(V[..., 1:4], V[..., 5:8]) / (V5 * V5)
    out[..., 5:8] = -V[..., 1:4] / V5[..., None]
    return out


def entropy_potential_prim(P, k, gamma):
    rho, p = P[..., RHO], P[..., PRES]
    v, B = P[..., VELOCITY], P[..., FIELD]
    W = 1.0 / np.sqrt(1.0 - _dot(v, v))
    vB = _dot(v, B)
    bsq = _dot(B, B) / (W * W) + vB * vB
    return rho * v[..., k] * W * (1.0 + 0.5 * bsq / p)


def entropy_potential(U, k: int, eos: EosParams):
    """psi_k = rho v_k W + rho v_k W b^2 / (2p)."""
    P = cons_to_prim(U, eos)
    return entropy_potential_prim(P, k, eos.gamma)


def flux_from_prim(P, k, gamma):
    """Physical flux F_k evaluated from primitive states."""
    rho, p = P[..., RHO], P[..., PRES]
    v, B = P[..., VELOCITY], P[..., FIELD]
    v2 = _dot(v, v)
    W2 = 1.0 / (1.0 - v2)
    vB = _dot(v, B)
    B2 = _dot(B, B)
    rhohW2 = (rho + gamma / (gamma - 1.0) * p) * W2
    pt = p + 0.5 * (B2 / W2 + vB * vB)
    m = (rhohW2 + B2)[..., None] * v - vB[..., None] * B
    vk = v[..., k]
    Bk = B[..., k]

    F = np.empty(np.broadcast(rho, P[..., 0]).shape + (NVARS,))
    F[..., DENS] = rho * np.sqrt(W2) * vk
    F[..., MOMENTUM] = m * vk[..., None] - Bk[..., None] * (B / W2[..., None] + vB[..., None] * v)
    F[..., MX + k] += pt
    F[..., ENER] = m[..., k]
    F[..., FIELD] = vk[..., None] * B - Bk[..., None] * v
    F[..., BX + k] = 0.0
    return F


def physical_flux(U, k: int, eos: EosParams):
    """F_k = (D v_k, m v_k - B_k (B/W^2 + (v.B) v) + pt e_k, m_k, v_k B - B_k v)."""
    P = cons_to_prim(U, eos)
    return flux_from_prim(P, k, eos.gamma)


def fast_speed_bound(P, direction, gamma):
    """
    Bound on |lambda| along `direction` (None: all three axes) for the system
    with the Godunov-Powell source. The fluid-frame fast speed never exceeds
    a^2 = cs^2 + ca^2 - cs^2 ca^2; boosting that sound cone by v gives
        lambda = (vn (1 - a^2) +- a sqrt((1 - v^2)(1 - v^2 a^2 - vn^2 (1 - a^2)))) / (1 - v^2 a^2).
    """
    P = np.asarray(P, dtype=float)
    aux = _auxiliaries(P, gamma)
    rho_h = P[..., RHO] * aux.h
    cs2 = gamma * P[..., PRES] / rho_h
    ca2 = aux.bsq / (rho_h + aux.bsq)
    a2 = np.minimum(cs2 + ca2 - cs2 * ca2, 1.0)
    v = P[..., VELOCITY]
    v2 = _dot(v, v)
    denom = 1.0 - v2 * a2
    axes = range(3) if direction is None else (direction,)
    bound = np.zeros(P.shape[:-1])
    for k in axes:
        vn = v[..., k]
        root = np.sqrt(np.maximum(a2 * (1.0 - v2) * (denom - vn * vn * (1.0 - a2)), 0.0))
        bound = np.maximum(bound, np.maximum((np.abs(vn) * (1.0 - a2) + root) / denom, np.abs(vn)))
    return np.minimum(bound, 1.0)


def max_signal_speed(U, eos: EosParams = None, direction=None, estimate: str = "light", P=None):
    """
    Upper bound on the spectral radius of dF/dU + Phi' dBx/dU.
    "light" is the light-speed bound 1; "fast" is the boosted fast-wave bound
    (needs eos; pass primitives P to skip the recovery).
    """
    U = np.asarray(U, dtype=float)
    if estimate == "light":
        return np.ones(U.shape[:-1])
    if estimate != "fast":
        raise ConfigError(f"Unknown signal speed estimate: {estimate} (choose from {', '.join(SIGNAL_SPEEDS)})")
    if eos is None:
        raise ConfigError("The fast signal speed needs the equation of state")
    P = cons_to_prim(U, eos) if P is None else P
    return fast_speed_bound(P, direction, eos.gamma)


def random_primitive_states(rng, n: int, vmax: float = 0.99, bmax: float = 10.0,
                            rho_range=(0.1, 10.0), p_range=(0.1, 10.0)):
    """
    Draws n admissible primitive states: log-uniform rho and p, isotropic
    directions for v and B with |v| <= vmax and |B| <= bmax.
    """
    rho = np.exp(rng.uniform(np.log(rho_range[0]), np.log(rho_range[1]), n))
    p = np.exp(rng.uniform(np.log(p_range[0]), np.log(p_range[1]), n))

    v_dir = rng.normal(size=(n, 3))
    v_dir /= np.linalg.norm(v_dir, axis=1, keepdims=True)
    B_dir = rng.normal(size=(n, 3))
    B_dir /= np.linalg.norm(B_dir, axis=1, keepdims=True)

    P = np.empty((n, NVARS))
    P[:, RHO] = rho
    P[:, VELOCITY] = v_dir * (vmax * rng.uniform(0.0, 1.0, n))[:, None]
    P[:, PRES] = p
    P[:, FIELD] = B_dir * (bmax * rng.uniform(0.0, 1.0, n))[:, None]
    return P
