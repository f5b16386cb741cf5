"""
Tests for the nodal DG semi-discretisation and time stepping.
"""
import logging
import sys

import numpy as np
import pytest

from core.errors import ConfigError, NumericalBlowupError
from core.physics import EosParams, cons_to_prim, entropy_variables_prim, max_signal_speed
from core.problems import SHIFTED, alfven_1d, alfven_1d_problem, alfven_2d_problem, riemann
from core.sbp import build_operator
from core.solver import (
    DIRICHLET, OUTFLOW, PERIODIC, BoundaryCondition, Mesh, compute_dt, domain_entropy, fv_reference_solve,
    integrate, neighbor_cells, project_initial, rhs, rhs_1d, rhs_2d, ssp_rk3_step, uniform_mesh,
)

EOS = EosParams(5.0 / 3.0)
STATE = np.array([1.3, 0.2, -0.4, 0.1, 0.7, 0.8, -0.5, 0.3])


def _uniform(*coords):
    return np.broadcast_to(STATE, np.shape(coords[0]) + (8,)).copy()


def _entropy_rate(field_, tendency):
    V = entropy_variables_prim(cons_to_prim(field_.U, EOS), EOS.gamma)
    w = field_.quadrature_weights()
    terms = w * np.sum(V * tendency, axis=-1)
    return float(np.sum(terms)), float(np.sum(np.abs(terms)))


@pytest.mark.parametrize("boundaries", [
    ((PERIODIC, PERIODIC),),
    ((OUTFLOW, DIRICHLET),),
])
@pytest.mark.parametrize("flux_mode", ["es", "ec"])
def test_free_stream_1d(boundaries, flux_mode):
    mesh = uniform_mesh((6,), (0.0,), (1.0,), boundaries)
    field_ = project_initial(mesh, build_operator(3), _uniform, EOS)
    tendency = rhs(field_, EOS, flux_mode)
    assert np.max(np.abs(tendency)) < 1e-12


@pytest.mark.parametrize("boundaries", [
    ((PERIODIC, PERIODIC), (PERIODIC, PERIODIC)),
    ((DIRICHLET, OUTFLOW), (OUTFLOW, OUTFLOW)),
    ((DIRICHLET, DIRICHLET), (BoundaryCondition("shifted", 2), BoundaryCondition("shifted", 2))),
])
def test_free_stream_2d(boundaries):
    mesh = uniform_mesh((5, 3), (0.0, 0.0), (1.0, 0.6), boundaries)
    field_ = project_initial(mesh, build_operator(2), _uniform, EOS)
    assert np.max(np.abs(rhs(field_, EOS))) < 1e-12


def test_entropy_conservative_mode_conserves_entropy_1d():
    field_ = alfven_1d_problem().initial_field(build_operator(3), (8,))
    rate, scale = _entropy_rate(field_, rhs(field_, EOS, "ec"))
    assert abs(rate) <= 1e-11 * max(scale, 1.0)


def test_entropy_conservative_mode_conserves_entropy_2d():
    field_ = alfven_2d_problem().initial_field(build_operator(2), (4, 4))
    rate, scale = _entropy_rate(field_, rhs(field_, EOS, "ec"))
    assert abs(rate) <= 1e-11 * max(scale, 1.0)


def test_entropy_stable_mode_dissipates():
    field_ = alfven_2d_problem().initial_field(build_operator(2), (4, 4))
    rate, scale = _entropy_rate(field_, rhs(field_, EOS, "es"))
    assert rate <= 1e-11 * max(scale, 1.0)


def test_periodic_alfven_conserves_all_components():
    field_ = alfven_1d_problem().initial_field(build_operator(2), (10,))
    tendency = rhs(field_, EOS)
    totals = np.einsum("il,ilc->c", field_.quadrature_weights(), tendency)
    np.testing.assert_allclose(totals, 0.0, atol=1e-13)


def test_density_conserved_with_source_2d():
    field_ = alfven_2d_problem().initial_field(build_operator(2), (4, 4))
    tendency = rhs(field_, EOS)
    total = np.sum(field_.quadrature_weights() * tendency[..., 0])
    assert abs(total) < 1e-13


def test_compute_dt():
    field_ = alfven_1d_problem().initial_field(build_operator(2), (40,))
    assert compute_dt(field_, 0.2) == pytest.approx(0.2 / 40)
    with pytest.raises(ConfigError):
        compute_dt(field_, 0.0)


def test_compute_dt_with_fast_signal_speed():
    field_ = alfven_1d_problem().initial_field(build_operator(2), (40,))
    alpha = float(np.max(max_signal_speed(field_.U, EOS, None, "fast")))
    assert 0.0 < alpha < 1.0
    assert compute_dt(field_, 0.2, EOS, "fast") == pytest.approx(0.2 / 40 / alpha, rel=1e-14)
    with pytest.raises(ConfigError):
        compute_dt(field_, 0.2, EOS, "sound")


def _smooth_random_state(rng, dimension):
    """Periodic primitive data on the unit square with random low modes."""
    phases = rng.uniform(0.0, 2.0 * np.pi, (8, 2))
    amps = np.array([0.3, 0.25, 0.25, 0.2, 0.4, 0.8, 0.8, 0.8]) * rng.uniform(0.5, 1.0, 8)
    base = np.array([1.0, 0.0, 0.0, 0.0, 1.0, 0.5, -0.3, 0.2])

    def initial(*coords):
        x = coords[0]
        y = coords[1] if dimension == 2 else 0.0 * x
        columns = []
        for c in range(8):
            wave = (np.sin(2.0 * np.pi * (x + 2.0 * y) + phases[c, 0])
                    + 0.5 * np.cos(2.0 * np.pi * (2.0 * x - y) + phases[c, 1]))
            columns.append(base[c] + amps[c] * wave / 1.5)
        return np.stack(columns, axis=-1)
    return initial


@pytest.mark.parametrize("seed", [0, 1, 2])
@pytest.mark.parametrize("signal_speed", ["light", "fast"])
def test_entropy_stable_inequality_on_random_smooth_fields(seed, signal_speed):
    rng = np.random.default_rng(seed)
    mesh1 = uniform_mesh((7,), (0.0,), (1.0,), ((PERIODIC, PERIODIC),))
    field1 = project_initial(mesh1, build_operator(3), _smooth_random_state(rng, 1), EOS)
    rate, scale = _entropy_rate(field1, rhs(field1, EOS, "es", signal_speed))
    assert rate <= 1e-11 * max(scale, 1.0)

    mesh2 = uniform_mesh((5, 4), (0.0, 0.0), (1.0, 1.0), ((PERIODIC, PERIODIC), (PERIODIC, PERIODIC)))
    field2 = project_initial(mesh2, build_operator(2), _smooth_random_state(rng, 2), EOS)
    rate, scale = _entropy_rate(field2, rhs(field2, EOS, "es", signal_speed))
    assert rate <= 1e-11 * max(scale, 1.0)


@pytest.mark.parametrize("signal_speed", ["light", "fast"])
def test_rhs_2d_matches_rhs_1d_on_extruded_data(signal_speed):
    op = build_operator(2)
    mesh1 = uniform_mesh((6,), (0.0,), (1.0,), ((PERIODIC, PERIODIC),))
    mesh2 = uniform_mesh((6, 3), (0.0, 0.0), (1.0, 0.5), ((PERIODIC, PERIODIC), (PERIODIC, PERIODIC)))
    field1 = project_initial(mesh1, op, lambda x: alfven_1d(x, 0.0), EOS)
    field2 = project_initial(mesh2, op, lambda X, Y: alfven_1d(X, 0.0), EOS)

    line = rhs_1d(field1, EOS, "es", signal_speed)
    plane = rhs_2d(field2, EOS, "es", signal_speed)
    expected = np.broadcast_to(line[:, None, :, None, :], plane.shape)
    np.testing.assert_allclose(plane, expected, rtol=0.0, atol=1e-10 * max(1.0, np.abs(line).max()))


def test_integrate_logs_total_entropy(caplog):
    field_ = alfven_1d_problem().initial_field(build_operator(2), (8,))
    with caplog.at_level(logging.INFO, logger="core.solver"):
        result = integrate(field_, EOS, 0.008, fixed_dt=0.004, log_every=1)
    lines = [r.getMessage() for r in caplog.records if r.getMessage().startswith("step ")]
    assert len(lines) == 2
    logged = float(lines[-1].split("entropy=")[1])
    assert logged == pytest.approx(domain_entropy(result.field, EOS), rel=1e-15)


def test_entropy_guard_retries_a_step_that_raises_entropy():
    field_ = alfven_1d_problem().initial_field(build_operator(2), (16,))
    start = domain_entropy(field_, EOS)
    calls = {"n": 0}

    def inject(U):
        # First attempt only: push every node along its entropy variables.
        calls["n"] += 1
        if calls["n"] > 3:
            return U
        V = entropy_variables_prim(cons_to_prim(U, EOS), EOS.gamma)
        return U + 1e-4 * V

    dt = compute_dt(field_, 0.2)
    result = integrate(field_, EOS, dt, cfl=0.2, limiter=inject, entropy_slack=1e-6)
    assert result.rejected >= 1
    assert result.steps >= 2
    assert result.field.t == pytest.approx(dt)
    assert domain_entropy(result.field, EOS) - start <= 1e-6 * abs(start)


def test_entropy_guard_is_off_without_slack():
    field_ = alfven_1d_problem().initial_field(build_operator(2), (8,))
    result = integrate(field_, EOS, 0.01, cfl=0.2, limiter=lambda U: U)
    assert result.rejected == 0



def test_ssp_rk3_matches_stability_polynomial():
    U = np.ones(3)
    out = ssp_rk3_step(U, 0.1, lambda V: -V)
    np.testing.assert_allclose(out, 1.0 - 0.1 + 0.1 ** 2 / 2.0 - 0.1 ** 3 / 6.0, rtol=1e-15)
    with pytest.raises(ConfigError):
        ssp_rk3_step(U, -0.1, lambda V: -V)


def test_integrate_lands_on_final_time():
    field_ = alfven_1d_problem().initial_field(build_operator(2), (8,))
    seen = []
    result = integrate(field_, EOS, 0.01, fixed_dt=0.004, on_step=lambda step, f: seen.append((step, f.t)))
    assert result.steps == 3
    assert result.field.t == pytest.approx(0.01)
    assert [s for s, _ in seen] == [0, 1, 2, 3]
    assert seen[0][1] == 0.0


def test_integrate_detects_blowup():
    field_ = alfven_1d_problem().initial_field(build_operator(2), (8,))
    calls = {"n": 0}

    def poison(U):
        calls["n"] += 1
        return U * np.nan if calls["n"] == 3 else U

    with pytest.raises(NumericalBlowupError):
        integrate(field_, EOS, 0.01, limiter=poison, fixed_dt=0.004)


def test_neighbor_cells_1d():
    A = np.arange(12, dtype=float).reshape(4, 3, 1)
    mesh = uniform_mesh((4,), (0.0,), (1.0,), ((PERIODIC, PERIODIC),))
    np.testing.assert_array_equal(neighbor_cells(A, mesh, 0, +1), np.roll(A, -1, axis=0))

    mesh = uniform_mesh((4,), (0.0,), (1.0,), ((OUTFLOW, OUTFLOW),))
    hi = neighbor_cells(A, mesh, 0, +1)
    lo = neighbor_cells(A, mesh, 0, -1)
    assert np.all(hi[-1] == A[-1, -1])
    assert np.all(lo[0] == A[0, 0])
    np.testing.assert_array_equal(hi[:-1], A[1:])

    means = A[:, 0, :]
    np.testing.assert_array_equal(neighbor_cells(means, mesh, 0, +1, nodal=False)[-1], means[-1])


def test_neighbor_cells_shifted():
    A = np.arange(8, dtype=float).reshape(4, 2, 1, 1, 1)
    mesh = uniform_mesh((4, 2), (0.0, 0.0), (1.0, 0.5),
                       ((DIRICHLET, DIRICHLET), (BoundaryCondition("shifted", 1),) * 2))
    up = neighbor_cells(A, mesh, 1, +1)
    down = neighbor_cells(A, mesh, 1, -1)
    for i in range(4):
        assert up[i, 1, 0, 0, 0] == A[min(i + 1, 3), 0, 0, 0, 0]
        assert down[i, 0, 0, 0, 0] == A[max(i - 1, 0), 1, 0, 0, 0]
        assert up[i, 0, 0, 0, 0] == A[i, 1, 0, 0, 0]


def test_dirichlet_without_frozen_data_raises():
    A = np.zeros((4, 3, 8))
    mesh = uniform_mesh((4,), (0.0,), (1.0,), ((DIRICHLET, DIRICHLET),))
    with pytest.raises(ConfigError):
        neighbor_cells(A, mesh, 0, +1)


@pytest.mark.parametrize("kwargs", [
    dict(cells=(4,), lower=(0.0,), upper=(1.0,), boundaries=((PERIODIC, OUTFLOW),)),
    dict(cells=(4,), lower=(0.0,), upper=(1.0,), boundaries=((SHIFTED, SHIFTED),)),
    dict(cells=(0,), lower=(0.0,), upper=(1.0,), boundaries=((OUTFLOW, OUTFLOW),)),
    dict(cells=(4, 4), lower=(0.0,), upper=(1.0,), boundaries=((OUTFLOW, OUTFLOW),)),
])
def test_invalid_meshes(kwargs):
    with pytest.raises(ConfigError):
        Mesh(**kwargs)


def test_unknown_boundary_and_flux_mode():
    with pytest.raises(ConfigError):
        BoundaryCondition("reflecting")
    field_ = alfven_2d_problem().initial_field(build_operator(1), (2, 2))
    with pytest.raises(ConfigError):
        rhs(field_, EOS, "upwind")
    with pytest.raises(ConfigError):
        rhs_1d(field_, EOS)


def test_node_coordinates_and_measure():
    mesh = uniform_mesh((2, 3), (0.0, -1.0), (1.0, 2.0), ((OUTFLOW, OUTFLOW),) * 2)
    X, Y = mesh.node_coordinates(build_operator(2))
    assert X.shape == Y.shape == (2, 3, 3, 3)
    assert X[0, 0, 1, 0] == pytest.approx(0.25)
    assert Y[0, 2, 0, 2] == pytest.approx(2.0)
    assert mesh.measure == pytest.approx(3.0)


def test_reference_solver_runs_riemann_problem():
    x, U = fv_reference_solve(riemann("I"), 50, t_end=0.05)
    assert x.shape == (50,) and U.shape == (50, 8)
    assert np.all(np.isfinite(U)) and np.all(U[:, 0] > 0.0)
    # undisturbed far field
    np.testing.assert_allclose(U[0, 0], 1.0, rtol=1e-12)


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
