"""
Initial data, exact solutions and the preset catalogue.

Initial-data callables take node coordinates (x) or (X, Y) and return
primitive states; exact-solution callables take (t, x) or (t, X, Y).
"""
import logging
import math
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Callable, Optional

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.optimize import brentq

from core.errors import ConfigError, InadmissibleStateError
from core.limiters import LimiterConfig
from core.physics import (
    BX, BY, BZ, FIELD, NVARS, PRES, RHO, VELOCITY, VX, VY, VZ, EosParams, lorentz_factor,
)
from core.sbp import QuadratureOperator
from core.solver import DIRICHLET, OUTFLOW, PERIODIC, BoundaryCondition, Mesh, project_initial, uniform_mesh

logger = logging.getLogger(__name__)

KAPPA_TOL = 1e-14
KAPPA_MAX_ITER = 50

ALFVEN_AMPLITUDE = 0.1
ALFVEN_ANGLE = math.pi / 6.0

VORTEX_V_MAX = 0.7
VORTEX_B_MAX = 0.7
VORTEX_STEP = 1e-4
VORTEX_R_MAX = 12.0
VORTEX_SPEED = 0.5 * math.sqrt(2.0)

SV_SPEED = -0.6 * math.sqrt(2.0)
SV_CENTER = (-3.0, 0.0)
SV_SHOCK_X = 2.0 * math.sqrt(2.0) - 3.0
SV_PRE_SHOCK = (6.73586072, 0.6 * math.sqrt(2.0), 0.0, 0.0, 0.0, 24.02454458)
SV_POST_SHOCK = (10.47090373, 0.507707117 * math.sqrt(2.0), 0.0, 0.0, 0.0, 50.44557978)

RIEMANN_CFL = 0.1

RST_LEFT = (1.0, 0.5, 0.0, 0.5, 0.5, 1.0)
RST_RIGHT = (1.0, -0.5, 0.0, 0.5, 0.5, 0.1)

BOOST_DIRECTION = np.array([1.0, 1.0, 0.0]) / math.sqrt(2.0)

SHIFTED = BoundaryCondition("shifted")


@dataclass(frozen=True)
class ProblemSpec:
    """
    A named experiment. `cells` is the default mesh, `variable` the quantity
    used for error reports. `cfl` (None: the global default), `signal_speed`
    and `entropy_guard` are the stepping defaults of the preset.
    """
    name: str
    dimension: int
    lower: tuple
    upper: tuple
    boundaries: tuple
    eos: EosParams
    t_end: float
    limiter: LimiterConfig
    initial: Callable = field(repr=False)
    exact: Optional[Callable] = field(default=None, repr=False)
    cells: tuple = ()
    variable: str = "rho"
    description: str = ""
    cfl: Optional[float] = None
    signal_speed: str = "light"
    entropy_guard: bool = False

    def build_mesh(self, cells=None) -> Mesh:
        """
        Uniform mesh for this problem. Shifted-periodic sides get the x offset
        matching the y extent of the domain.
        """
        cells = tuple(int(n) for n in (cells or self.cells))
        if len(cells) != self.dimension:
            raise ConfigError(f"Problem {self.name} is {self.dimension}D but got cells {cells}")
        boundaries = self.boundaries
        if any(bc.kind == "shifted" for pair in boundaries for bc in pair):
            dx = (self.upper[0] - self.lower[0]) / cells[0]
            shift = (self.upper[1] - self.lower[1]) / dx
            offset = int(round(shift))
            if offset < 1 or abs(shift - offset) > 1e-9:
                raise ConfigError(
                    f"Shifted boundaries of {self.name} need the y extent to span whole x cells; "
                    f"got {shift:.6g} with nx={cells[0]}")
            boundaries = tuple(
                tuple(replace(bc, offset=offset) if bc.kind == "shifted" else bc for bc in pair)
                for pair in boundaries
            )
        return uniform_mesh(cells, self.lower, self.upper, boundaries)

    def initial_field(self, op: QuadratureOperator, cells=None):
        return project_initial(self.build_mesh(cells), op, self.initial, self.eos)

    def with_overrides(self, **changes) -> "ProblemSpec":
        return replace(self, **changes)


def _constant(shape, values):
    """Primitive array of `shape` filled with (rho, vx, vy, vz, p, Bx, By, Bz)."""
    P = np.empty(tuple(shape) + (NVARS,))
    P[...] = np.asarray(values, dtype=float)
    return P


def _from_rho_v_b_p(rho, vx, vy, vz, Bx, By, Bz, p):
    """Riemann data are listed as (rho, v, B, p)."""
    return (rho, vx, vy, vz, p, Bx, By, Bz)


# ---------------------------------------------------------------------------
# Alfven waves
# ---------------------------------------------------------------------------

def alfven_kappa(rho: float = 1.0, p: float = 0.1, amplitude: float = ALFVEN_AMPLITUDE,
                 gamma: float = 5.0 / 3.0) -> float:
    """kappa = sqrt(1 + rho h W^2), iterated to a fixed point."""
    W = float(lorentz_factor(np.array([0.0, amplitude, 0.0])))
    h = 1.0 + gamma / (gamma - 1.0) * p / rho
    kappa = 1.0
    for _ in range(KAPPA_MAX_ITER):
        updated = math.sqrt(1.0 + rho * h * W * W)
        if abs(updated - kappa) <= KAPPA_TOL * updated:
            return updated
        kappa = updated
    raise InadmissibleStateError("Alfven wave speed iteration did not converge")


def alfven_1d(x, t: float, gamma: float = 5.0 / 3.0):
    """Exact circularly polarised Alfven wave on [0, 1]."""
    x = np.asarray(x, dtype=float)
    kappa = alfven_kappa(gamma=gamma)
    phase = 2.0 * np.pi * (x + t / kappa)
    P = _constant(x.shape, (1.0, 0.0, 0.0, 0.0, 0.1, 1.0, 0.0, 0.0))
    P[..., VY] = ALFVEN_AMPLITUDE * np.sin(phase)
    P[..., VZ] = ALFVEN_AMPLITUDE * np.cos(phase)
    P[..., BY] = kappa * P[..., VY]
    P[..., BZ] = kappa * P[..., VZ]
    return P


def alfven_2d(x, y, t: float, gamma: float = 5.0 / 3.0, alpha: float = ALFVEN_ANGLE):
    """The 1D wave travelling along (cos alpha, sin alpha)."""
    x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    kappa = alfven_kappa(gamma=gamma)
    xi = x * math.cos(alpha) + y * math.sin(alpha)
    phase = 2.0 * np.pi * (xi + t / kappa)
    wave = ALFVEN_AMPLITUDE * np.sin(phase)
    P = _constant(x.shape, (1.0, 0.0, 0.0, 0.0, 0.1, 0.0, 0.0, 0.0))
    P[..., VX] = -wave * math.sin(alpha)
    P[..., VY] = wave * math.cos(alpha)
    P[..., VZ] = ALFVEN_AMPLITUDE * np.cos(phase)
    P[..., BX] = math.cos(alpha) + kappa * P[..., VX]
    P[..., BY] = math.sin(alpha) + kappa * P[..., VY]
    P[..., BZ] = kappa * P[..., VZ]
    return P


# ---------------------------------------------------------------------------
# Isentropic vortex
# ---------------------------------------------------------------------------

def _vortex_decay(r):
    return np.exp(0.5 * (1.0 - r * r))


@dataclass(frozen=True)
class VortexProfile:
    """Total pressure p_t(r) of the steady vortex, tabulated and splined."""
    gamma: float
    pt_center: float
    radii: np.ndarray = field(repr=False)
    total_pressure: np.ndarray = field(repr=False)
    spline: CubicSpline = field(repr=False)

    def pt(self, r):
        return self.spline(np.minimum(r, self.radii[-1]))

    def pressure(self, r):
        B = VORTEX_B_MAX * _vortex_decay(r) * r
        return self.pt(r) - 0.5 * B * B


def _vortex_slope(r: float, pt: float, gamma: float) -> float:
    """d p_t / d r with p = rho^Gamma."""
    if r == 0.0:
        return 0.0
    decay = math.exp(0.5 * (1.0 - r * r))
    v2 = (VORTEX_V_MAX * decay * r) ** 2
    # v parallel to B, so b^2 = |B|^2.
    b2 = (VORTEX_B_MAX * decay * r) ** 2
    p = pt - 0.5 * b2
    if p <= 0.0:
        raise InadmissibleStateError(f"Vortex pressure became non-positive at r={r:.6g}")
    rho = p ** (1.0 / gamma)
    rho_h = rho + gamma / (gamma - 1.0) * p
    W2 = 1.0 / (1.0 - v2)
    return ((rho_h + b2) * W2 * v2 - b2) / r


@lru_cache(maxsize=32)
def integrate_vortex_pressure(gamma: float = 5.0 / 3.0, pt_center: float = 1.0,
                              step: float = VORTEX_STEP, r_max: float = VORTEX_R_MAX) -> VortexProfile:
    """Classical RK4 from p_t(0) = pt_center out to r_max."""
    n = int(round(r_max / step))
    radii = np.linspace(0.0, r_max, n + 1)
    values = np.empty(n + 1)
    pt = float(pt_center)
    values[0] = pt
    for k in range(n):
        r = radii[k]
        k1 = _vortex_slope(r, pt, gamma)
        k2 = _vortex_slope(r + 0.5 * step, pt + 0.5 * step * k1, gamma)
        k3 = _vortex_slope(r + 0.5 * step, pt + 0.5 * step * k2, gamma)
        k4 = _vortex_slope(r + step, pt + step * k3, gamma)
        pt += step / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        values[k + 1] = pt
    return VortexProfile(gamma, float(pt_center), radii, values, CubicSpline(radii, values))


@lru_cache(maxsize=8)
def shoot_vortex_center(far_pressure: float, gamma: float = 5.0 / 3.0) -> float:
    """Central p_t whose profile reaches pressure `far_pressure` at r_max."""
    def miss(pt_center):
        return float(integrate_vortex_pressure(gamma, pt_center).pressure(VORTEX_R_MAX)) - far_pressure

    low, high = 0.5 * far_pressure, 2.0 * far_pressure
    while miss(low) > 0.0:
        low *= 0.5
    while miss(high) < 0.0:
        high *= 2.0
    center = brentq(miss, low, high, xtol=1e-13, rtol=1e-14)
    logger.info("vortex far-field shooting: p_t(0)=%.12g for p(%.0f)=%.12g", center, VORTEX_R_MAX, far_pressure)
    return center


def vortex_base(r, pt_center: float = 1.0, gamma: float = 5.0 / 3.0):
    """(|v|, |B|, p_t) of the steady vortex at radius r."""
    r = np.asarray(r, dtype=float)
    if np.any(r < 0.0):
        raise ConfigError("Vortex radius must be non-negative")
    decay = _vortex_decay(r)
    profile = integrate_vortex_pressure(gamma, pt_center)
    return VORTEX_V_MAX * decay * r, VORTEX_B_MAX * decay * r, profile.pt(r)


def vortex_state(x, y, pt_center: float = 1.0, gamma: float = 5.0 / 3.0):
    """Steady vortex centred at the origin, primitive states."""
    x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    r = np.hypot(x, y)
    decay = _vortex_decay(r)
    profile = integrate_vortex_pressure(gamma, pt_center)
    p = profile.pressure(r)
    P = _constant(x.shape, (0.0,) * NVARS)
    P[..., RHO] = p ** (1.0 / gamma)
    P[..., VX] = -VORTEX_V_MAX * decay * y
    P[..., VY] = VORTEX_V_MAX * decay * x
    P[..., PRES] = p
    P[..., BX] = -VORTEX_B_MAX * decay * y
    P[..., BY] = VORTEX_B_MAX * decay * x
    return P


def _boost_gamma(w: float) -> float:
    if abs(w) >= 1.0:
        raise InadmissibleStateError(f"Boost speed must satisfy |w| < 1, got {w}")
    return 1.0 / math.sqrt(1.0 - w * w)


def boost_coordinates(w: float, xp, yp, tp):
    """(x, y, t) in the rest frame of the pattern from (x', y', t') in the moving frame."""
    g = _boost_gamma(w)
    s = (np.asarray(xp) + np.asarray(yp)) / math.sqrt(2.0)
    t = g * (tp + w * s)
    shift = ((g - 1.0) * s + g * w * tp) / math.sqrt(2.0)
    return xp + shift, yp + shift, t


def lorentz_boost(P, w: float, xp, yp, tp):
    """
    Primitive states P given in frame S, seen from S' moving with speed w
    along (1, 1). Velocities use relativistic addition; B is transformed
    together with the ideal-MHD electric field E = -v x B. rho and p are
    invariant. Returns (P', x, y, t) with (x, y, t) the S coordinates of the
    event (x', y', t').
    """
    g = _boost_gamma(w)
    x, y, t = boost_coordinates(w, xp, yp, tp)
    P = np.asarray(P, dtype=float)
    beta = w * BOOST_DIRECTION
    v = P[..., VELOCITY]
    B = P[..., FIELD]
    beta_v = v @ beta
    beta_B = B @ beta
    E = -np.cross(v, B)

    out = P.copy()
    out[..., VELOCITY] = (v / g - beta + (g / (g + 1.0)) * beta_v[..., None] * beta) / (1.0 - beta_v)[..., None]
    out[..., FIELD] = g * (B - np.cross(beta, E)) - (g * g / (g + 1.0)) * beta_B[..., None] * beta
    return out, x, y, t


def boosted_vortex(xp, yp, tp: float = 0.0, w: float = VORTEX_SPEED, pt_center: float = 1.0,
                   gamma: float = 5.0 / 3.0):
    """The steady vortex observed from S'; it drifts with speed w along (-1, -1)."""
    x, y, _ = boost_coordinates(w, xp, yp, tp)
    P, *_ = lorentz_boost(vortex_state(x, y, pt_center, gamma), w, xp, yp, tp)
    return P


def _periodic_vortex_exact(lower, upper, w, gamma):
    length = np.asarray(upper) - np.asarray(lower)

    def exact(t, X, Y):
        # The pattern translates by w t / sqrt(2) per axis; wrap into the box.
        drift = w * t / math.sqrt(2.0)
        xs = lower[0] + np.mod(X + drift - lower[0], length[0])
        ys = lower[1] + np.mod(Y + drift - lower[1], length[1])
        return boosted_vortex(xs, ys, 0.0, w, 1.0, gamma)

    return exact


# ---------------------------------------------------------------------------
# Shock problems
# ---------------------------------------------------------------------------

RIEMANN_STATES = {
    "I": (2.0,
          _from_rho_v_b_p(1.0, 0.0, 0.0, 0.0, 0.5, 1.0, 0.0, 1.0),
          _from_rho_v_b_p(0.125, 0.0, 0.0, 0.0, 0.5, -1.0, 0.0, 0.1)),
    "II": (5.0 / 3.0,
           _from_rho_v_b_p(1.0, 0.0, 0.0, 0.0, 5.0, 6.0, 6.0, 30.0),
           _from_rho_v_b_p(1.0, 0.0, 0.0, 0.0, 5.0, 0.7, 0.7, 1.0)),
    "III": (5.0 / 3.0,
            _from_rho_v_b_p(1.0, 0.0, 0.3, 0.4, 1.0, 6.0, 2.0, 5.0),
            _from_rho_v_b_p(0.9, 0.0, 0.0, 0.0, 1.0, 5.0, 2.0, 5.3)),
}
_RIEMANN_ALIASES = {"1": "I", "2": "II", "3": "III"}


def _step_profile(left, right, position):
    def initial(x):
        x = np.asarray(x, dtype=float)
        return np.where((x < position)[..., None], _constant(x.shape, left), _constant(x.shape, right))
    return initial


def riemann(name: str) -> ProblemSpec:
    """Riemann problem I, II or III on [0, 1] with the jump at x = 0.5."""
    key = _RIEMANN_ALIASES.get(str(name), str(name).upper())
    if key not in RIEMANN_STATES:
        raise ConfigError(f"Unknown Riemann problem: {name}")
    gamma, left, right = RIEMANN_STATES[key]
    return ProblemSpec(
        name=f"riemann{len(key)}",
        dimension=1,
        lower=(0.0,), upper=(1.0,),
        boundaries=((DIRICHLET, DIRICHLET),),
        eos=EosParams(gamma),
        t_end=0.4,
        limiter=LimiterConfig(tvb_M=10.0, indicator="kxrcf"),
        initial=_step_profile(left, right, 0.5),
        cells=(800,),
        description=f"1D Riemann problem {key}",
        cfl=RIEMANN_CFL,
        entropy_guard=True,
    )


def _rotated_shock_state(values):
    """(rho, v_par, v_perp, B_par, B_perp, p) along e_par = (1,1)/sqrt2, e_perp = (-1,1)/sqrt2."""
    rho, v_par, v_perp, b_par, b_perp, p = values
    c = 1.0 / math.sqrt(2.0)
    return (rho, c * (v_par - v_perp), c * (v_par + v_perp), 0.0,
            p, c * (b_par - b_perp), c * (b_par + b_perp), 0.0)


def _normal_shock_state(values):
    rho, v_par, v_perp, b_par, b_perp, p = values
    return (rho, v_par, v_perp, 0.0, p, b_par, b_perp, 0.0)


def orszag_tang() -> ProblemSpec:
    def initial(X, Y):
        P = _constant(np.shape(X), (25.0 / (36.0 * np.pi), 0.0, 0.0, 0.0, 5.0 / (12.0 * np.pi), 0.0, 0.0, 0.0))
        P[..., VX] = 0.5 * np.sin(2.0 * np.pi * Y)
        P[..., VY] = 0.5 * np.sin(2.0 * np.pi * X)
        P[..., BX] = -np.sin(2.0 * np.pi * Y) / np.sqrt(4.0 * np.pi)
        P[..., BY] = np.sin(4.0 * np.pi * X) / np.sqrt(4.0 * np.pi)
        return P

    return ProblemSpec(
        name="orszag_tang", dimension=2,
        lower=(0.0, 0.0), upper=(1.0, 1.0),
        boundaries=((PERIODIC, PERIODIC), (PERIODIC, PERIODIC)),
        eos=EosParams(5.0 / 3.0), t_end=1.0,
        limiter=LimiterConfig(tvb_M=10.0),
        initial=initial, cells=(400, 400),
        description="Orszag-Tang vortex",
        entropy_guard=True,
    )


def blast(bx: float = 0.1) -> ProblemSpec:
    """Cylindrical blast wave; rho and p taper linearly in radius on [0.8, 1]."""
    def initial(X, Y):
        r = np.hypot(X, Y)
        weight = np.clip((1.0 - r) / 0.2, 0.0, 1.0)
        P = _constant(np.shape(X), (0.0, 0.0, 0.0, 0.0, 0.0, bx, 0.0, 0.0))
        P[..., RHO] = 1e-4 + weight * (0.01 - 1e-4)
        P[..., PRES] = 5e-4 + weight * (1.0 - 5e-4)
        return P

    name = "blast" if bx == 0.1 else f"blast_bx{str(bx).replace('.', '')}"
    return ProblemSpec(
        name=name, dimension=2,
        lower=(-6.0, -6.0), upper=(6.0, 6.0),
        boundaries=((OUTFLOW, OUTFLOW), (OUTFLOW, OUTFLOW)),
        eos=EosParams(4.0 / 3.0), t_end=4.0,
        limiter=LimiterConfig(tvb_M=0.01),
        initial=initial, cells=(400, 400),
        description=f"Blast wave, Bx={bx}",
        entropy_guard=True,
    )


def shock_vortex() -> ProblemSpec:
    """
    Boosted vortex with w = -0.6 sqrt2 rotated clockwise by pi/4 so that its
    far field is the pre-shock state; stationary shock at x = 2 sqrt2 - 3.
    """
    gamma = 5.0 / 3.0
    c = s = 1.0 / math.sqrt(2.0)

    def initial(X, Y):
        pt_center = shoot_vortex_center(SV_PRE_SHOCK[5], gamma)
        dx, dy = X - SV_CENTER[0], Y - SV_CENTER[1]
        xu, yu = c * dx - s * dy, s * dx + c * dy
        U = boosted_vortex(xu, yu, 0.0, SV_SPEED, pt_center, gamma)
        P = U.copy()
        for vec in (slice(1, 3), slice(5, 7)):
            ax, ay = U[..., vec.start], U[..., vec.start + 1]
            P[..., vec.start] = c * ax + s * ay
            P[..., vec.start + 1] = -s * ax + c * ay
        post = _constant(np.shape(X), _rotated_free(SV_POST_SHOCK))
        return np.where((X >= SV_SHOCK_X)[..., None], post, P)

    return ProblemSpec(
        name="shock_vortex", dimension=2,
        lower=(-9.0, -9.0), upper=(9.0, 9.0),
        boundaries=((DIRICHLET, DIRICHLET), (OUTFLOW, OUTFLOW)),
        eos=EosParams(gamma), t_end=10.0,
        limiter=LimiterConfig(tvb_M=10.0),
        initial=initial, cells=(600, 600),
        description="Shock-vortex interaction",
    )


def _rotated_free(values):
    """(rho, vx, vy, Bx, By, p) -> primitive layout."""
    rho, vx, vy, bx, by, p = values
    return (rho, vx, vy, 0.0, p, bx, by, 0.0)


def rotated_shock_tube() -> ProblemSpec:
    """Shock tube along (1, 1) on an 800 x 2 strip with shifted-periodic y sides."""
    left, right = _rotated_shock_state(RST_LEFT), _rotated_shock_state(RST_RIGHT)

    def initial(X, Y):
        return np.where(((X + Y) < 0.5)[..., None], _constant(np.shape(X), left), _constant(np.shape(X), right))

    return ProblemSpec(
        name="rst", dimension=2,
        lower=(0.0, 0.0), upper=(1.0, 2.0 / 800.0),
        boundaries=((DIRICHLET, DIRICHLET), (SHIFTED, SHIFTED)),
        eos=EosParams(5.0 / 3.0), t_end=0.4,
        limiter=LimiterConfig(tvb_M=10.0),
        initial=initial, cells=(800, 2),
        description="Rotated shock tube",
    )


def rotated_shock_tube_normal() -> ProblemSpec:
    """The rotated shock tube in its normal coordinate s = (x + y) / sqrt2."""
    length = 1.0 / math.sqrt(2.0)
    return ProblemSpec(
        name="rst1d", dimension=1,
        lower=(0.0,), upper=(length,),
        boundaries=((DIRICHLET, DIRICHLET),),
        eos=EosParams(5.0 / 3.0), t_end=0.4,
        limiter=LimiterConfig(tvb_M=10.0, indicator="all"),
        initial=_step_profile(_normal_shock_state(RST_LEFT), _normal_shock_state(RST_RIGHT), 0.5 * length),
        cells=(800,),
        description="Rotated shock tube, normal direction",
    )


# ---------------------------------------------------------------------------
# Catalogue
# ---------------------------------------------------------------------------

def alfven_1d_problem() -> ProblemSpec:
    return ProblemSpec(
        name="alfven1d", dimension=1,
        lower=(0.0,), upper=(1.0,),
        boundaries=((PERIODIC, PERIODIC),),
        eos=EosParams(5.0 / 3.0), t_end=1.0,
        limiter=LimiterConfig(enabled=False),
        initial=lambda x: alfven_1d(x, 0.0),
        exact=lambda t, x: alfven_1d(x, t),
        cells=(40,), variable="By",
        description="1D Alfven wave",
        signal_speed="fast",
    )


def alfven_2d_problem() -> ProblemSpec:
    return ProblemSpec(
        name="alfven2d", dimension=2,
        lower=(0.0, 0.0), upper=(2.0 / math.sqrt(3.0), 2.0),
        boundaries=((PERIODIC, PERIODIC), (PERIODIC, PERIODIC)),
        eos=EosParams(5.0 / 3.0), t_end=1.0,
        limiter=LimiterConfig(enabled=False),
        initial=lambda X, Y: alfven_2d(X, Y, 0.0),
        exact=lambda t, X, Y: alfven_2d(X, Y, t),
        cells=(20, 20), variable="By",
        description="2D Alfven wave at angle pi/6",
        signal_speed="fast",
    )


def vortex_problem() -> ProblemSpec:
    lower, upper = (-5.0, -5.0), (5.0, 5.0)
    gamma = 5.0 / 3.0
    exact = _periodic_vortex_exact(lower, upper, VORTEX_SPEED, gamma)
    return ProblemSpec(
        name="vortex", dimension=2,
        lower=lower, upper=upper,
        boundaries=((PERIODIC, PERIODIC), (PERIODIC, PERIODIC)),
        eos=EosParams(gamma), t_end=20.0,
        limiter=LimiterConfig(enabled=False),
        initial=lambda X, Y: exact(0.0, X, Y),
        exact=exact,
        cells=(40, 40), variable="D",
        description="Lorentz-boosted isentropic vortex",
        signal_speed="fast",
    )


PRESETS = {
    "alfven1d": alfven_1d_problem,
    "alfven2d": alfven_2d_problem,
    "riemann1": lambda: riemann("I"),
    "riemann2": lambda: riemann("II"),
    "riemann3": lambda: riemann("III"),
    "vortex": vortex_problem,
    "orszag_tang": orszag_tang,
    "blast": lambda: blast(0.1),
    "blast_bx05": lambda: blast(0.5),
    "shock_vortex": shock_vortex,
    "rst": rotated_shock_tube,
    "rst1d": rotated_shock_tube_normal,
}


def presets() -> dict:
    """Every preset by name."""
    return {name: build() for name, build in PRESETS.items()}


def get_problem(name: str) -> ProblemSpec:
    try:
        return PRESETS[name]()
    except KeyError:
        raise ConfigError(f"Unknown problem preset: {name}") from None
