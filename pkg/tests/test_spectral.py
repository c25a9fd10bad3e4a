import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from pclab import BoxDomain, NodalField, SpectralField, basis_field, norm, project
from pclab.errors import InputError
from pclab.spectral import (
    TimeGrid,
    constant_coefficients,
    eigenvalues,
    from_spectral,
    inner_product,
    laplacian_eigenvalue,
    smallest_eigenvalue,
    to_spectral,
)


def random_band_limited(domain, cap, seed):
    rng = np.random.default_rng(seed)
    return SpectralField(domain, rng.standard_normal(cap))


def test_box_domain_rejects_bad_shapes():
    with pytest.raises(InputError):
        BoxDomain(4)
    with pytest.raises(InputError):
        BoxDomain(1, lengths=-1.0)
    with pytest.raises(InputError):
        BoxDomain(1, grid_points=3)


def test_time_grid_nodes():
    g = TimeGrid(2.0, 8)
    assert g.nodes[0] == 0.0 and g.nodes[-1] == 2.0
    assert np.all(np.diff(g.nodes) > 0)
    assert g.refined(2).steps == 16


@pytest.mark.parametrize("L", [np.pi, 2.0, 5.5])
def test_first_mode_transforms_to_unit_coefficient(L):
    dom = BoxDomain(1, L, 63)
    c = project(lambda x: np.sin(np.pi * x / L), dom, 8).coeffs
    assert abs(c[0] - 1) < 1e-12
    assert np.max(np.abs(c[1:])) < 1e-12


def test_zero_field_transforms_to_zero():
    dom = BoxDomain(2, np.pi, 15)
    c = to_spectral(NodalField(dom, np.zeros((15, 15))), 6)
    assert np.all(c.coeffs == 0)
    assert np.all(from_spectral(SpectralField(dom, np.zeros((4, 4)))).values == 0)


def test_parabola_coefficients_match_quadrature():
    L = 2.0
    dom = BoxDomain(1, L, 1023)
    c = project(lambda x: x * (L - x), dom, 16).coeffs
    for k in range(1, 17):
        ref = 2 / L * quad(lambda x: x * (L - x) * np.sin(k * np.pi * x / L), 0, L, epsabs=1e-13, limit=200)[0]
        closed = 8 * L**2 / (np.pi**3 * k**3) if k % 2 else 0.0
        assert abs(ref - closed) < 1e-12
        assert abs(c[k - 1] - ref) < 1e-8


@pytest.mark.parametrize("dims,cap,n", [(1, (12,), (31,)), (2, (5, 7), (15, 17)), (3, (3, 4, 2), (7, 9, 5))])
def test_round_trip_and_parseval(dims, cap, n):
    dom = BoxDomain(dims, np.pi, n)
    f = random_band_limited(dom, cap, 7)
    back = to_spectral(from_spectral(f), cap)
    assert np.max(np.abs(back.coeffs - f.coeffs)) < 1e-12
    nodal = norm(from_spectral(f), "L2")
    spec = norm(f, "L2")
    assert abs(nodal - spec) / spec < 1e-10


def test_to_spectral_rejects_cap_above_grid():
    dom = BoxDomain(1, np.pi, 7)
    with pytest.raises(InputError):
        to_spectral(NodalField(dom, np.ones(7)), 8)


def test_nodal_shape_mismatch():
    with pytest.raises(InputError):
        NodalField(BoxDomain(1, np.pi, 7), np.ones(8))


def test_laplacian_eigenvalues():
    assert laplacian_eigenvalue(1, BoxDomain(1, np.pi)) == pytest.approx(1.0, abs=1e-15)
    assert laplacian_eigenvalue((1, 2), BoxDomain(2, np.pi)) == pytest.approx(5.0, abs=1e-14)
    assert laplacian_eigenvalue(3, BoxDomain(1, 2.0)) == pytest.approx(9 * np.pi**2 / 4, rel=1e-15)
    assert 9 * np.pi**2 / 4 == pytest.approx(22.2066, abs=1e-4)
    with pytest.raises(InputError):
        laplacian_eigenvalue(0, BoxDomain(1, np.pi))
    with pytest.raises(InputError):
        laplacian_eigenvalue(-2, BoxDomain(1, np.pi))


def test_sine_norms_closed_form():
    dom = BoxDomain(1, np.pi, 255)
    f = basis_field(dom, 1)
    assert norm(f, "L2") == pytest.approx(np.sqrt(np.pi / 2), rel=1e-14)
    # trapezoid is exact for trigonometric polynomials of low enough degree
    assert norm(f, "L4") ** 4 == pytest.approx(3 * np.pi / 8, rel=1e-12)
    assert norm(f, "H1_0") == pytest.approx(np.sqrt(np.pi / 2), rel=1e-14)
    assert norm(f, "H_minus1") == pytest.approx(np.sqrt(np.pi / 2), rel=1e-14)


def test_zero_field_norms():
    dom = BoxDomain(2, np.pi, 15)
    z = SpectralField(dom, np.zeros((3, 3)))
    for which in ("L2", "L4", "H1_0", "H_minus1"):
        assert norm(z, which) == 0.0


def test_unknown_norm_tag():
    with pytest.raises(InputError):
        norm(basis_field(BoxDomain(1), 1), "L3")


def test_inner_products():
    dom = BoxDomain(1, np.pi, 255)
    e1, e2 = basis_field(dom, 1, mode_cap=4), basis_field(dom, 2, mode_cap=4)
    assert abs(inner_product(e1, e2)) < 1e-12
    f = random_band_limited(dom, (9,), 3)
    assert abs(inner_product(f, f) - norm(f) ** 2) / norm(f) ** 2 < 1e-12
    one = NodalField(dom, np.ones(255))
    # nodal quadrature of sin x against 1 carries an O(h^2) error
    assert inner_product(e1, one) == pytest.approx(2.0, rel=1e-4)
    exact_one = SpectralField(dom, constant_coefficients(dom, 64))
    assert inner_product(e1, exact_one) == pytest.approx(2.0, rel=1e-14)


def test_inner_product_domain_mismatch():
    with pytest.raises(InputError):
        inner_product(basis_field(BoxDomain(1, np.pi), 1), basis_field(BoxDomain(1, 2.0), 1))


def test_poincare_ordering_and_single_mode_equality():
    dom = BoxDomain(2, (np.pi, 2.0), 31)
    lam1 = smallest_eigenvalue(dom)
    f = random_band_limited(dom, (6, 6), 11)
    assert norm(f, "H_minus1") <= lam1**-0.5 * norm(f) * (1 + 1e-14)
    assert norm(f) <= lam1**-0.5 * norm(f, "H1_0") * (1 + 1e-14)
    e = basis_field(dom, (1, 1), 0.7)
    assert norm(e, "H_minus1") == pytest.approx(lam1**-0.5 * norm(e), rel=1e-14)
    assert norm(e) == pytest.approx(lam1**-0.5 * norm(e, "H1_0"), rel=1e-14)


def test_eigenvalue_layout():
    dom = BoxDomain(2, np.pi, 15)
    lam = eigenvalues(dom, (3, 4))
    assert lam.shape == (3, 4)
    assert lam[2, 3] == pytest.approx(9 + 16)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**31), st.floats(-3, 3), st.floats(-3, 3))
def test_triangle_inequality_and_bilinearity(seed, a, b):
    dom = BoxDomain(1, np.pi, 31)
    f = random_band_limited(dom, (8,), seed)
    g = random_band_limited(dom, (8,), seed + 1)
    h = random_band_limited(dom, (8,), seed + 2)
    assert norm(f + g) <= norm(f) + norm(g) + 1e-12
    lhs = inner_product(f * a + g * b, h)
    rhs = a * inner_product(f, h) + b * inner_product(g, h)
    assert abs(lhs - rhs) <= 1e-12 * (1 + abs(lhs))
    assert inner_product(f, g) == pytest.approx(inner_product(g, f), rel=1e-14, abs=1e-14)
    assert inner_product(f, f) > 0


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**31), st.integers(1, 3))
def test_round_trip_property(seed, dims):
    n = {1: 33, 2: 17, 3: 9}[dims]
    dom = BoxDomain(dims, np.pi, n)
    cap = (n // 2,) * dims
    f = random_band_limited(dom, cap, seed)
    assert np.max(np.abs(to_spectral(from_spectral(f), cap).coeffs - f.coeffs)) < 1e-12
