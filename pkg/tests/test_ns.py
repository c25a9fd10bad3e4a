import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pclab import TimeGrid
from pclab.errors import DegenerateInputError, DivergenceError, InputError
from pclab.ns import (
    DivFreeField,
    PeriodicBox,
    galerkin_truncate,
    grid_nodes,
    l4_norm,
    ladyzhenskaya_check,
    ladyzhenskaya_ratio,
    leray_project,
    ns_evolve,
    random_field,
    single_mode,
    taylor_green,
    taylor_green_exact,
    trilinear_b,
    uniqueness_experiment,
)

import oracles

BOX2 = PeriodicBox(2, 4)
BOX3 = PeriodicBox(3, 4)


def test_box_validation():
    with pytest.raises(InputError):
        PeriodicBox(1, 4)
    with pytest.raises(InputError):
        PeriodicBox(3, 0)
    assert BOX3.shape == (3, 9, 9, 9)
    assert BOX3.product_points >= 13


def test_field_invariants_are_enforced():
    raw = np.zeros(BOX2.shape, dtype=complex)
    raw[0, 5, 4] = 1.0     # k = (1, 0), u along x: divergent and not Hermitian
    with pytest.raises(InputError):
        DivFreeField(BOX2, raw)
    with pytest.raises(InputError):
        DivFreeField(BOX2, np.zeros((2, 3, 3)))
    mean = np.zeros(BOX2.shape, dtype=complex)
    mean[1, 4, 4] = 1.0
    assert "no k = 0 mode" in DivFreeField(BOX2, mean, check=False).violations()


def test_gradient_field_projects_to_zero():
    rng = np.random.default_rng(0)
    phi = rng.standard_normal(BOX3.shape[1:]) + 1j * rng.standard_normal(BOX3.shape[1:])
    grad = 1j * BOX3.wavevectors() * phi
    assert np.max(np.abs(leray_project(grad, BOX3).coeffs)) < 1e-14


@pytest.mark.parametrize("box", [BOX2, BOX3])
def test_leray_is_idempotent_and_self_adjoint(box):
    u = random_field(box, 1)
    again = leray_project(u.coeffs, box)
    assert np.max(np.abs(again.coeffs - u.coeffs)) < 1e-14
    rng = np.random.default_rng(2)
    a = rng.standard_normal(box.shape) + 1j * rng.standard_normal(box.shape)
    b = rng.standard_normal(box.shape) + 1j * rng.standard_normal(box.shape)
    pa = leray_project(a, box, real=False).coeffs
    pb = leray_project(b, box, real=False).coeffs
    assert abs(np.vdot(pa, b) - np.vdot(a, pb)) < 1e-10 * np.abs(a).sum()


def test_random_projections_are_divergence_free():
    k = BOX3.wavevectors()
    for seed in range(100):
        u = random_field(BOX3, seed)
        amp = np.sqrt(np.sum(np.abs(u.coeffs) ** 2, axis=0))
        dot = np.abs(np.sum(k * u.coeffs, axis=0))
        assert np.all(dot <= 1e-12 * np.maximum(amp, amp.max() * 1e-3))
        assert u.violations() == []


def test_triad_matches_real_space_quadrature():
    u = single_mode(BOX2, (1, 0), (0, 1))
    v = single_mode(BOX2, (0, 1), (1, 0), -1j)
    w = single_mode(BOX2, (-1, -1), np.array([1, -1]) / np.sqrt(2))
    # u = (0, 2 cos x), v = (2 sin y, 0), w = sqrt(2) cos(x + y) (1, -1)
    X, Y = grid_nodes(BOX2, 64)
    integrand = (2 * np.cos(X)) * (2 * np.cos(Y)) * (np.sqrt(2) * np.cos(X + Y))
    oracle = integrand.sum() * (2 * np.pi / 64) ** 2
    assert oracle == pytest.approx(4 * np.sqrt(2) * np.pi**2, rel=1e-13)
    assert trilinear_b(u, v, w) == pytest.approx(oracle, rel=1e-12)
    assert trilinear_b(u, w, v) == pytest.approx(-oracle, rel=1e-12)


def test_single_mode_self_interaction_vanishes():
    u = single_mode(BOX3, (1, 2, 0), (0, 0, 1))
    assert abs(trilinear_b(u, u, u)) < 1e-12


def test_b_needs_enough_points_and_same_box():
    u = random_field(BOX2, 0)
    with pytest.raises(InputError):
        trilinear_b(u, u, u, points=10)
    with pytest.raises(InputError):
        trilinear_b(u, random_field(PeriodicBox(2, 3), 0), u)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6), st.sampled_from([2, 3]))
def test_b_skew_symmetry(seed, dims):
    box = BOX2 if dims == 2 else BOX3
    u, v, w = (random_field(box, seed + i) for i in range(3))
    scale = u.l2_norm() * v.grad_norm() * w.grad_norm()
    assert abs(trilinear_b(u, v, v)) <= 1e-10 * u.l2_norm() * v.grad_norm() ** 2
    assert abs(trilinear_b(u, v, w) + trilinear_b(u, w, v)) <= 1e-10 * scale


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10**6), st.floats(-3, 3).filter(lambda a: abs(a) > 1e-3))
def test_b_is_trilinear(seed, a):
    u, v, w, z = (random_field(BOX2, seed + i) for i in range(4))
    lhs = trilinear_b(u * a + z, v, w)
    rhs = a * trilinear_b(u, v, w) + trilinear_b(z, v, w)
    assert abs(lhs - rhs) <= 1e-10 * (abs(lhs) + 1)


def test_stokes_decay_of_single_mode():
    k = np.array([1, 2, 0])
    u = single_mode(BOX3, k, (0, 0, 1))
    nu = 0.3
    traj = ns_evolve(u, None, nu, TimeGrid(1.0, 20))
    exact = np.exp(-nu * (k @ k) * traj.times)
    assert np.max(np.abs(traj.l2_norms() / u.l2_norm() - exact)) < 1e-10


def test_energy_is_nonincreasing_and_balanced():
    y0 = random_field(BOX3, 5, energy=1.0)
    traj = ns_evolve(y0, None, 0.5, TimeGrid(1.0, 200))
    assert np.all(np.diff(traj.l2_norms()) <= 1e-14)
    assert traj.energy_residual() <= 1e-6 * y0.l2_norm() ** 2
    assert traj.divergence_ratios().max() <= 1e-10


def test_taylor_green_decay():
    box = PeriodicBox(2, 4)
    y0 = taylor_green(box)
    traj = ns_evolve(y0, None, 0.1, TimeGrid(1.0, 50))
    exact = taylor_green_exact(box, 0.1, traj.times)
    assert np.max(np.abs(traj.coeffs - exact)) < 1e-8


def test_forcing_shapes():
    y0 = random_field(BOX2, 3)
    f = random_field(BOX2, 4)
    grid = TimeGrid(0.1, 4)
    a = ns_evolve(y0, f, 0.5, grid)
    b = ns_evolve(y0, [f] * 5, 0.5, grid)
    c = ns_evolve(y0, lambda t: f, 0.5, grid)
    assert np.array_equal(a.coeffs, b.coeffs) and np.array_equal(a.coeffs, c.coeffs)
    with pytest.raises(InputError):
        ns_evolve(y0, [f] * 3, 0.5, grid)
    with pytest.raises(InputError):
        ns_evolve(y0, None, 0.0, grid)


def test_forced_energy_balance():
    y0 = random_field(BOX2, 3)
    f = random_field(BOX2, 4)
    traj = ns_evolve(y0, f, 0.5, TimeGrid(1.0, 200))
    assert traj.energy_residual() <= 1e-6 * y0.l2_norm() ** 2


def test_blow_up_is_detected():
    # a huge steady forcing pushes |y| past the divergence threshold
    y0 = random_field(BOX2, 1, energy=1e-3)
    f = random_field(BOX2, 2, energy=1e6)
    with pytest.raises(DivergenceError):
        ns_evolve(y0, f, 0.01, TimeGrid(1.0, 10))


def test_galerkin_truncate():
    y0 = random_field(BOX3, 8)
    assert np.array_equal(galerkin_truncate(y0, 4).coeffs, y0.coeffs)
    two = single_mode(BOX3, (2, 0, 0), (0, 1, 0))
    assert np.all(galerkin_truncate(two, 1).coeffs == 0)
    low = galerkin_truncate(y0, 2)
    dropped = y0.box.volume * np.sum(np.abs(y0.coeffs[:, y0.box.radius() > 2]) ** 2)
    assert (y0 - low).l2_norm() ** 2 == pytest.approx(dropped, rel=1e-13)
    assert low.l2_norm() <= y0.l2_norm()
    for bad in (0, 5, 1.5):
        with pytest.raises(InputError):
            galerkin_truncate(y0, bad)


def test_uniqueness_band_limited_data_is_captured_exactly():
    y0 = galerkin_truncate(random_field(BOX3, 2), 2)
    res = uniqueness_experiment(y0, None, 0.5, [2, 3, 4], TimeGrid(0.2, 10))
    assert np.all(res.D <= 1e-10)
    assert np.all(np.isnan(res.C))


def test_uniqueness_single_mode():
    y0 = single_mode(BOX3, (1, 1, 0), (0, 0, 1))
    res = uniqueness_experiment(y0, None, 0.5, [1, 2], TimeGrid(0.2, 10))
    assert np.all(res.D == 0)


def test_uniqueness_small_run_is_monotone():
    y0 = random_field(BOX3, 1)
    res = uniqueness_experiment(y0, None, 0.5, [1, 2, 3, 4], TimeGrid(0.2, 10))
    assert res.decreasing
    assert res.D[-1] <= 1e-10
    assert np.all(np.isfinite(res.C[:-1]))
    assert res.sup_l4 > 0
    with pytest.raises(InputError):
        uniqueness_experiment(y0, None, 0.5, [2, 1], TimeGrid(0.2, 2))
    with pytest.raises(InputError):
        uniqueness_experiment(y0, None, 0.5, [1, 5], TimeGrid(0.2, 2))


def test_l4_norm_exact_on_single_mode():
    u = single_mode(BOX3, (1, 0, 0), (0, 1, 0))
    # |u| = 2 |cos x|: int 16 cos^4 = 16 * 3/8 (2 pi)^3
    assert l4_norm(u) ** 4 == pytest.approx(6 * (2 * np.pi) ** 3, rel=1e-13)


def test_ladyzhenskaya_single_mode_closed_form():
    v = single_mode(PeriodicBox(3, 4), (1, 0, 0), (0, 1, 0))
    assert ladyzhenskaya_ratio(v) == pytest.approx(oracles.L4_SINGLE_MODE_RHO, rel=1e-13)
    expected = 3**0.25 / (2**1.5 * np.pi**0.75)
    assert oracles.L4_SINGLE_MODE_RHO == pytest.approx(expected, rel=1e-15)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10**6), st.floats(-100, 100).filter(lambda a: abs(a) > 1e-6))
def test_ladyzhenskaya_homogeneity(seed, alpha):
    v = random_field(BOX3, seed)
    assert ladyzhenskaya_ratio(v * alpha) == pytest.approx(ladyzhenskaya_ratio(v), rel=1e-12)


def test_ladyzhenskaya_errors_and_resolutions():
    with pytest.raises(DegenerateInputError):
        ladyzhenskaya_ratio(BOX3.zero())
    with pytest.raises(InputError):
        ladyzhenskaya_ratio(random_field(BOX2, 0))
    res = ladyzhenskaya_check([random_field(BOX3, s) for s in range(5)])
    assert res.quadrature_gap <= 1e-6
    assert res.points == (BOX3.quartic_points, 2 * BOX3.quartic_points)
