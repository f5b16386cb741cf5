"""
Tests for the two-point fluxes: entropy conservation, symmetry, consistency
and the entropy production of the Lax-Friedrichs interface flux.
"""
import sys

import numpy as np
import pytest

from core.errors import InadmissibleStateError
from core.fluxes import (
    ec_condition_residual, ec_flux, entropy_balance, es_entropy_production, es_flux,
    lax_friedrichs, log_mean,
)
from core.physics import BX, EosParams, physical_flux, prim_to_cons, random_primitive_states

EOS = EosParams(5.0 / 3.0)


def _pairs(seed, n=500, **kwargs):
    rng = np.random.default_rng(seed)
    UL = prim_to_cons(random_primitive_states(rng, n, **kwargs), EOS)
    UR = prim_to_cons(random_primitive_states(rng, n, **kwargs), EOS)
    return UL, UR


def test_log_mean_matches_closed_form():
    a, b = np.array([1.0, 2.0, 0.3]), np.array([3.0, 2.5, 7.0])
    expected = (a - b) / (np.log(a) - np.log(b))
    np.testing.assert_allclose(log_mean(a, b), expected, rtol=1e-14)


def test_log_mean_near_equal_arguments():
    a = np.array([1.0, 5.0])
    assert np.array_equal(log_mean(a, a), a)
    # series branch stays continuous with the quotient
    np.testing.assert_allclose(log_mean(1.0, 1.0 + 1e-9), 1.0 + 0.5e-9, rtol=1e-15)


def test_log_mean_rejects_non_positive():
    with pytest.raises(InadmissibleStateError):
        log_mean(np.array([1.0]), np.array([0.0]))


@pytest.mark.parametrize("direction", [0, 1, 2])
def test_ec_flux_conserves_entropy(direction):
    UL, UR = _pairs(direction, vmax=0.9, bmax=5.0)
    F = ec_flux(direction, UL, UR, EOS, check_system=True)
    dV_F, d_psi, _ = entropy_balance(direction, UL, UR, F, EOS)
    residual = ec_condition_residual(direction, UL, UR, EOS, flux=F)
    scale = 1.0 + np.maximum(np.abs(d_psi), np.abs(dV_F))
    assert np.max(np.abs(residual) / scale) < 1e-10


@pytest.mark.parametrize("direction", [0, 1, 2])
def test_ec_flux_is_symmetric(direction):
    UL, UR = _pairs(10 + direction)
    np.testing.assert_allclose(ec_flux(direction, UL, UR, EOS), ec_flux(direction, UR, UL, EOS),
                               rtol=1e-12, atol=1e-12)


@pytest.mark.parametrize("direction", [0, 1, 2])
def test_ec_flux_is_consistent(direction):
    U, _ = _pairs(20 + direction, n=200)
    F = ec_flux(direction, U, U, EOS)
    exact = physical_flux(U, direction, EOS)
    scale = 1.0 + np.abs(exact).max(axis=-1, keepdims=True)
    assert np.max(np.abs(F - exact) / scale) < 1e-10


@pytest.mark.parametrize("direction", [0, 1, 2])
def test_fluxes_vanish_in_normal_field_slot(direction):
    UL, UR = _pairs(30 + direction, n=100)
    assert np.all(ec_flux(direction, UL, UR, EOS)[:, BX + direction] == 0.0)
    # the jump term of Lax-Friedrichs acts on the normal field too
    F = es_flux(direction, UL, UR, EOS)
    np.testing.assert_allclose(F[:, BX + direction], -0.5 * (UR - UL)[:, BX + direction], rtol=1e-14)


@pytest.mark.parametrize("direction", [0, 1])
def test_lax_friedrichs_produces_entropy(direction):
    UL, UR = _pairs(40 + direction)
    production = es_entropy_production(direction, UL, UR, EOS)
    assert np.all(production <= 1e-12 * (1.0 + np.abs(production)))


def test_lax_friedrichs_formula():
    FL, FR = np.ones((2, 8)), 3.0 * np.ones((2, 8))
    UL, UR = np.zeros((2, 8)), 2.0 * np.ones((2, 8))
    np.testing.assert_allclose(lax_friedrichs(FL, FR, UL, UR, np.array([1.0, 0.5])),
                               [[1.0] * 8, [1.5] * 8])


def test_ec_flux_rejects_inadmissible_input():
    UL, UR = _pairs(50, n=3)
    UL[1, 0] = -1.0
    with pytest.raises(InadmissibleStateError):
        ec_flux(0, UL, UR, EOS)


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
