"""
Tests for initial data, exact solutions, the Lorentz boost and the preset
catalogue.
"""
import math
import sys

import numpy as np
import pytest

from core.errors import ConfigError, InadmissibleStateError
from core.physics import BX, BY, BZ, PRES, RHO, VX, VY, VZ, EosParams, prim_to_cons, random_primitive_states
from core.problems import (
    ALFVEN_AMPLITUDE, PRESETS, RST_LEFT, SV_PRE_SHOCK, SV_SHOCK_X, VORTEX_B_MAX, VORTEX_SPEED,
    _boost_gamma, alfven_1d, alfven_2d, alfven_kappa, blast, boost_coordinates, boosted_vortex,
    get_problem, integrate_vortex_pressure, lorentz_boost, presets, riemann, rotated_shock_tube,
    shock_vortex, shoot_vortex_center, vortex_base, vortex_state,
)
from core.sbp import build_operator

EOS = EosParams(5.0 / 3.0)


def _random_prims(seed, n=20):
    return random_primitive_states(np.random.default_rng(seed), n, vmax=0.8, bmax=2.0)


# ---------------------------------------------------------------------------
# Alfven waves
# ---------------------------------------------------------------------------

def test_alfven_kappa():
    W2 = 1.0 / (1.0 - ALFVEN_AMPLITUDE ** 2)
    h = 1.0 + 2.5 * 0.1
    assert alfven_kappa() == pytest.approx(math.sqrt(1.0 + h * W2), rel=1e-14)


def test_alfven_1d_wave():
    x = np.linspace(0.0, 1.0, 17)
    P = alfven_1d(x, 0.0)
    speed = np.hypot(P[:, VY], P[:, VZ])
    np.testing.assert_allclose(speed, ALFVEN_AMPLITUDE, rtol=1e-14)
    np.testing.assert_allclose(P[:, BY], alfven_kappa() * P[:, VY], rtol=1e-14)
    assert np.all(P[:, BX] == 1.0) and np.all(P[:, RHO] == 1.0) and np.all(P[:, PRES] == 0.1)
    # one period in time
    np.testing.assert_allclose(alfven_1d(x, alfven_kappa()), P, atol=1e-14)


def test_alfven_2d_is_rotated_1d_wave():
    alpha = math.pi / 6.0
    xi = np.linspace(0.0, 1.0, 9)
    X, Y = xi * math.cos(alpha), xi * math.sin(alpha)
    P2 = alfven_2d(X, Y, 0.3)
    P1 = alfven_1d(xi, 0.3)
    normal = np.array([math.cos(alpha), math.sin(alpha)])
    tangent = np.array([-math.sin(alpha), math.cos(alpha)])
    np.testing.assert_allclose(P2[:, [BX, BY]] @ normal, 1.0, rtol=1e-14)
    np.testing.assert_allclose(P2[:, [VX, VY]] @ normal, 0.0, atol=1e-15)
    np.testing.assert_allclose(P2[:, [VX, VY]] @ tangent, P1[:, VY], atol=1e-15)
    np.testing.assert_allclose(P2[:, VZ], P1[:, VZ], atol=1e-15)


# ---------------------------------------------------------------------------
# Boost
# ---------------------------------------------------------------------------

def test_boost_gamma():
    assert _boost_gamma(0.5 * math.sqrt(2.0)) == pytest.approx(math.sqrt(2.0))
    with pytest.raises(InadmissibleStateError):
        _boost_gamma(1.0)


def test_zero_boost_is_identity():
    P = _random_prims(1)
    x, y = np.linspace(-1, 1, 20), np.linspace(0, 2, 20)
    out, X, Y, T = lorentz_boost(P, 0.0, x, y, 0.5)
    np.testing.assert_allclose(out, P, atol=1e-15)
    np.testing.assert_allclose(X, x)
    np.testing.assert_allclose(Y, y)
    assert np.all(T == 0.5)


def test_boost_of_rest_state():
    P = np.array([[1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0]])
    w = 0.6
    out, *_ = lorentz_boost(P, w, 0.0, 0.0, 0.0)
    np.testing.assert_allclose(out[0, VX:VZ + 1], [-w / math.sqrt(2.0), -w / math.sqrt(2.0), 0.0], atol=1e-15)
    assert out[0, RHO] == 1.0 and out[0, PRES] == 1.0


def test_boost_and_inverse_boost():
    P = _random_prims(2)
    w = 0.7
    forward, *_ = lorentz_boost(P, w, 0.0, 0.0, 0.0)
    back, *_ = lorentz_boost(forward, -w, 0.0, 0.0, 0.0)
    np.testing.assert_allclose(back, P, atol=1e-12)
    # the boosted state stays physical
    prim_to_cons(forward, EOS)


def test_boost_coordinates_invert():
    xp, yp, tp = np.array([0.3, -2.0]), np.array([1.5, 0.25]), 1.7
    x, y, t = boost_coordinates(0.4, xp, yp, tp)
    back = boost_coordinates(-0.4, x, y, t)
    np.testing.assert_allclose(back[0], xp, atol=1e-14)
    np.testing.assert_allclose(back[1], yp, atol=1e-14)
    np.testing.assert_allclose(back[2], tp, atol=1e-14)
    # the interval is invariant
    s2 = -t ** 2 + x ** 2 + y ** 2
    np.testing.assert_allclose(s2, -tp ** 2 + xp ** 2 + yp ** 2, rtol=1e-13)


# ---------------------------------------------------------------------------
# Vortex
# ---------------------------------------------------------------------------

def test_vortex_centre():
    v, B, pt = vortex_base(np.array([0.0]))
    assert v[0] == 0.0 and B[0] == 0.0
    assert pt[0] == pytest.approx(1.0, abs=1e-14)
    with pytest.raises(ConfigError):
        vortex_base(np.array([-1.0]))


def test_vortex_pressure_step_halving():
    coarse = integrate_vortex_pressure(5.0 / 3.0, 1.0, 2e-4, 3.0)
    fine = integrate_vortex_pressure(5.0 / 3.0, 1.0, 1e-4, 3.0)
    r = np.array([0.5, 1.0, 2.0, 3.0])
    np.testing.assert_allclose(coarse.pt(r), fine.pt(r), rtol=1e-11)


def test_vortex_state_balance():
    X, Y = np.array([1.0, 0.0, -0.6]), np.array([0.0, 2.0, 0.8])
    P = vortex_state(X, Y)
    r = np.hypot(X, Y)
    # velocity and field are azimuthal and parallel
    np.testing.assert_allclose(P[:, VX] * X + P[:, VY] * Y, 0.0, atol=1e-15)
    np.testing.assert_allclose(P[:, BX] * P[:, VY] - P[:, BY] * P[:, VX], 0.0, atol=1e-15)
    B = VORTEX_B_MAX * np.exp(0.5 * (1.0 - r * r)) * r
    _, _, pt = vortex_base(r)
    np.testing.assert_allclose(P[:, PRES], pt - 0.5 * B * B, rtol=1e-13)
    np.testing.assert_allclose(P[:, RHO], P[:, PRES] ** 0.6, rtol=1e-13)
    assert np.all(P[:, BZ] == 0.0)


def test_unboosted_vortex_matches_steady_state():
    X, Y = np.array([0.5, -1.0]), np.array([0.2, 1.0])
    np.testing.assert_allclose(boosted_vortex(X, Y, 0.0, 0.0), vortex_state(X, Y), atol=1e-15)


def test_vortex_preset_is_periodic_drift():
    problem = get_problem("vortex")
    X, Y = np.array([0.3, -2.0]), np.array([1.0, 4.0])
    # after a full period along (1, 1) the pattern is back
    period = 10.0 * math.sqrt(2.0) / VORTEX_SPEED
    np.testing.assert_allclose(problem.exact(period, X, Y), problem.exact(0.0, X, Y), atol=1e-10)


@pytest.mark.slow
def test_vortex_far_field_shooting():
    center = shoot_vortex_center(SV_PRE_SHOCK[5])
    profile = integrate_vortex_pressure(5.0 / 3.0, center)
    assert float(profile.pressure(12.0)) == pytest.approx(SV_PRE_SHOCK[5], rel=1e-10)


# ---------------------------------------------------------------------------
# Presets
# ---------------------------------------------------------------------------

def test_catalogue():
    catalogue = presets()
    assert set(catalogue) == set(PRESETS)
    for name, problem in catalogue.items():
        assert problem.name == name
        assert len(problem.cells) == problem.dimension


def test_preset_stepping_defaults():
    for name in ("riemann1", "riemann2", "riemann3"):
        problem = get_problem(name)
        assert problem.limiter.indicator == "kxrcf"
        assert problem.cfl == pytest.approx(0.1)
        assert problem.entropy_guard is True
    for name in ("alfven1d", "alfven2d", "vortex"):
        problem = get_problem(name)
        assert problem.signal_speed == "fast"
        assert problem.cfl is None and problem.entropy_guard is False
    assert get_problem("orszag_tang").signal_speed == "light"


@pytest.mark.parametrize("name", ["nope", ""])
def test_unknown_preset(name):
    with pytest.raises(ConfigError, match="Unknown problem preset"):
        get_problem(name)


def test_riemann_aliases():
    assert riemann("2").name == riemann("II").name == "riemann2"
    assert riemann("iii").eos.gamma == pytest.approx(5.0 / 3.0)
    assert riemann("I").eos.gamma == 2.0
    with pytest.raises(ConfigError):
        riemann("IV")


def test_riemann_initial_jump():
    problem = riemann("I")
    P = problem.initial(np.array([0.25, 0.75]))
    assert P[0, RHO] == 1.0 and P[1, RHO] == 0.125
    assert P[0, BY] == 1.0 and P[1, BY] == -1.0
    assert P[0, BX] == 0.5


def test_blast_profile():
    problem = blast(0.5)
    assert problem.name == "blast_bx05" and problem.eos.gamma == pytest.approx(4.0 / 3.0)
    P = problem.initial(np.array([0.0, 0.9, 3.0]), np.array([0.0, 0.0, 0.0]))
    np.testing.assert_allclose(P[:, RHO], [0.01, 0.5 * (0.01 + 1e-4), 1e-4], rtol=1e-12)
    np.testing.assert_allclose(P[:, PRES], [1.0, 0.5 * (1.0 + 5e-4), 5e-4], rtol=1e-12)
    assert np.all(P[:, BX] == 0.5)


def test_rotated_shock_tube_mesh():
    problem = rotated_shock_tube()
    mesh = problem.build_mesh()
    assert mesh.boundaries[1][0].offset == 2
    assert problem.build_mesh((400, 2)).boundaries[1][1].offset == 1
    with pytest.raises(ConfigError):
        problem.build_mesh((300, 2))
    P = problem.initial(np.array([0.1, 0.9]), np.array([0.0, 0.0]))
    c = 1.0 / math.sqrt(2.0)
    np.testing.assert_allclose(P[0, [VX, VY]], [c * RST_LEFT[1], c * RST_LEFT[1]], rtol=1e-14)
    assert P[1, PRES] == 0.1


def test_problem_cells_must_match_dimension():
    with pytest.raises(ConfigError):
        get_problem("alfven1d").build_mesh((4, 4))


def test_initial_field_shapes():
    field_ = get_problem("alfven2d").initial_field(build_operator(2), (3, 4))
    assert field_.U.shape == (3, 4, 3, 3, 8)
    assert field_.frozen is None


@pytest.mark.slow
def test_shock_vortex_initial_data():
    problem = shock_vortex()
    X = np.array([-8.9, SV_SHOCK_X + 0.1])
    P = problem.initial(X, np.array([8.9, 0.0]))
    # far field upstream of the shock is the pre-shock state, downstream the post-shock state
    assert P[0, RHO] == pytest.approx(SV_PRE_SHOCK[0], rel=1e-3)
    assert P[1, RHO] == pytest.approx(10.47090373)


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
