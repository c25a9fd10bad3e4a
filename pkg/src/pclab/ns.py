"""Fourier-Galerkin Navier-Stokes on the periodic box ``[0, 2 pi]^d``.

Velocity fields are stored as complex Fourier coefficients ``u_k`` for the
cube of wavevectors ``|k_i| <= K`` (array shape ``(d, 2K+1, ..., 2K+1)``,
index ``K`` is ``k_i = 0``), with

    u(x) = sum_k u_k exp(i k.x),      |u|^2_{L2} = (2 pi)^d sum_k |u_k|^2.

On the torus the Leray-projected Fourier modes are the Stokes
eigenfunctions, so truncating the cube is an exact Galerkin scheme.
Quadratic terms are evaluated on a uniform grid of at least ``3K + 1``
points per axis, where the triple products entering ``b`` integrate without
aliasing; quartic integrals (the L4 norm) use ``4K + 1`` points.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy import fft as sfft

from .errors import DegenerateInputError, DivergenceError, InputError
from .spectral import TimeGrid

DIV_TOL = 1e-12
BLOWUP_FACTOR = 1e6


@dataclass(frozen=True)
class PeriodicBox:
    """``[0, 2 pi]^dims`` truncated to wavevectors with every ``|k_i| <= K``."""

    dims: int
    K: int

    def __post_init__(self):
        if self.dims not in (2, 3):
            raise InputError(f"dims must be 2 or 3, got {self.dims}")
        if int(self.K) != self.K or self.K < 1:
            raise InputError(f"mode radius K must be an integer >= 1, got {self.K}")
        object.__setattr__(self, "K", int(self.K))

    @property
    def side(self) -> int:
        return 2 * self.K + 1

    @property
    def shape(self) -> tuple:
        return (self.dims,) + (self.side,) * self.dims

    @property
    def volume(self) -> float:
        return (2 * np.pi) ** self.dims

    @property
    def product_points(self) -> int:
        """Default grid for ``b``: the first FFT-friendly size >= 3K + 1, the alias-free minimum."""
        return sfft.next_fast_len(3 * self.K + 1)

    @property
    def quartic_points(self) -> int:
        return sfft.next_fast_len(4 * self.K + 1)

    def wavevectors(self) -> np.ndarray:
        """Integer wavevectors, shape ``(dims, 2K+1, ...)``."""
        k = np.arange(-self.K, self.K + 1)
        return np.array(np.meshgrid(*([k] * self.dims), indexing="ij"), dtype=float)

    def k_squared(self) -> np.ndarray:
        return np.sum(self.wavevectors() ** 2, axis=0)

    def radius(self) -> np.ndarray:
        """Max-norm ``max_i |k_i|`` of every wavevector."""
        return np.max(np.abs(self.wavevectors()), axis=0)

    def zero(self) -> "DivFreeField":
        return DivFreeField(self, np.zeros(self.shape, dtype=complex), check=False)


def _hermitian_part(c: np.ndarray) -> np.ndarray:
    """``(c_k + conj(c_{-k})) / 2``: the coefficients of the real part of the field."""
    flip = c[(slice(None),) + (slice(None, None, -1),) * (c.ndim - 1)]
    return 0.5 * (c + np.conj(flip))


def _leray(box: PeriodicBox, c: np.ndarray) -> np.ndarray:
    k = box.wavevectors()
    k2 = box.k_squared()
    k2[k2 == 0] = 1.0
    kc = np.sum(k * c, axis=0) / k2
    out = c - k * kc
    out[(slice(None),) + (box.K,) * box.dims] = 0.0
    return out


@dataclass(frozen=True, eq=False)
class DivFreeField:
    """Real, mean-free, divergence-free velocity field on a :class:`PeriodicBox`."""

    box: PeriodicBox
    coeffs: np.ndarray

    def __init__(self, box: PeriodicBox, coeffs, check: bool = True):
        c = np.array(coeffs, dtype=complex)
        if c.shape != box.shape:
            raise InputError(f"coefficient shape {c.shape} does not match box {box.shape}")
        if not np.all(np.isfinite(c)):
            raise InputError("coefficients must be finite")
        c.setflags(write=False)
        object.__setattr__(self, "box", box)
        object.__setattr__(self, "coeffs", c)
        if check:
            bad = self.violations()
            if bad:
                raise InputError("not a real divergence-free mean-free field: " + ", ".join(bad))

    def violations(self, tol: float = DIV_TOL) -> list:
        out = []
        if self.divergence_ratio() > tol:
            out.append("k . u_k = 0")
        c = self.coeffs
        scale = max(float(np.abs(c).max()), 1e-300)
        if np.abs(c - _hermitian_part(c)).max() > tol * scale:
            out.append("u_{-k} = conj(u_k)")
        if np.abs(c[(slice(None),) + (self.box.K,) * self.box.dims]).max() > 0:
            out.append("no k = 0 mode")
        return out

    def divergence_ratio(self) -> float:
        """``max_k |k . u_k| / |k|`` divided by ``max_k |u_k|`` (0 for the zero field).

        Normalising by the largest coefficient rather than mode by mode keeps
        round-off-level modes from producing ratios of order one.
        """
        k = self.box.wavevectors()
        kn = np.sqrt(self.box.k_squared())
        kn[kn == 0] = 1.0
        amp = np.sqrt(np.sum(np.abs(self.coeffs) ** 2, axis=0))
        top = float(amp.max())
        if top == 0:
            return 0.0
        dot = np.abs(np.sum(k * self.coeffs, axis=0)) / kn
        return float(dot.max() / top)

    def _same(self, other: "DivFreeField"):
        if not isinstance(other, DivFreeField) or other.box != self.box:
            raise InputError("fields live on different boxes or mode radii")

    def __add__(self, other):
        self._same(other)
        return DivFreeField(self.box, self.coeffs + other.coeffs, check=False)

    def __sub__(self, other):
        self._same(other)
        return DivFreeField(self.box, self.coeffs - other.coeffs, check=False)

    def __mul__(self, a):
        return DivFreeField(self.box, complex(a) * self.coeffs if np.iscomplexobj(a) else float(a) * self.coeffs,
                            check=False)

    __rmul__ = __mul__

    def __neg__(self):
        return -1.0 * self

    def l2_norm(self) -> float:
        return float(np.sqrt(self.box.volume * np.sum(np.abs(self.coeffs) ** 2)))

    def grad_norm(self) -> float:
        """``||grad u||_{L2}``."""
        return float(np.sqrt(self.box.volume * np.sum(self.box.k_squared() * np.abs(self.coeffs) ** 2)))

    def inner(self, other: "DivFreeField") -> float:
        self._same(other)
        return float(self.box.volume * np.real(np.sum(self.coeffs * np.conj(other.coeffs))))

    def on_grid(self, points: int | None = None) -> np.ndarray:
        """Nodal values on ``points`` per axis (default ``3K + 1``), shape ``(d, N, ..., N)``."""
        return to_grid(self.coeffs, self.box, points or self.box.product_points)


def _grid_index(box: PeriodicBox, points: int):
    idx = np.arange(-box.K, box.K + 1) % points
    return np.ix_(*([idx] * box.dims))


def to_grid(c: np.ndarray, box: PeriodicBox, points: int) -> np.ndarray:
    """Synthesize coefficient arrays with leading component axes on an ``N^d`` grid."""
    if points < box.side:
        raise InputError(f"grid of {points} points cannot hold radius {box.K}")
    lead = c.shape[:-box.dims]
    full = np.zeros(lead + (points,) * box.dims, dtype=complex)
    full[(Ellipsis,) + _grid_index(box, points)] = c
    axes = tuple(range(-box.dims, 0))
    return np.real(sfft.ifftn(full, axes=axes)) * points**box.dims


def from_grid(values: np.ndarray, box: PeriodicBox) -> np.ndarray:
    """Fourier coefficients ``|k_i| <= K`` of nodal values (leading axes preserved)."""
    points = values.shape[-1]
    axes = tuple(range(-box.dims, 0))
    full = sfft.fftn(values, axes=axes) / points**box.dims
    return full[(Ellipsis,) + _grid_index(box, points)]


def grid_nodes(box: PeriodicBox, points: int) -> list:
    x = 2 * np.pi * np.arange(points) / points
    return np.meshgrid(*([x] * box.dims), indexing="ij")


def leray_project(raw, box: PeriodicBox, real: bool = True) -> DivFreeField:
    """Apply ``u_k -> (I - k k^T / |k|^2) u_k`` and drop the mean.

    With ``real`` the Hermitian part is taken first, so the result is the
    projection of the real part of the input field.
    """
    c = np.array(raw, dtype=complex)
    if c.shape != box.shape:
        raise InputError(f"coefficient shape {c.shape} does not match box {box.shape}")
    if not np.all(np.isfinite(c)):
        raise InputError("coefficients must be finite")
    if real:
        c = _hermitian_part(c)
    return DivFreeField(box, _leray(box, c), check=False)


def random_field(box: PeriodicBox, seed: int, slope: float = 1.0, energy: float | None = None) -> DivFreeField:
    """Seeded random field with amplitudes ``~ (1 + |k|^2)^(-slope)``.

    ``energy`` rescales to a prescribed ``|u|_{L2}``.
    """
    rng = np.random.default_rng(seed)
    raw = rng.standard_normal(box.shape) + 1j * rng.standard_normal(box.shape)
    raw *= (1.0 + box.k_squared()) ** (-slope)
    u = leray_project(raw, box)
    if energy is not None:
        n = u.l2_norm()
        if n == 0:
            raise DegenerateInputError("random field vanished")
        u = (energy / n) * u
    return u


def _gradients(c: np.ndarray, box: PeriodicBox, points: int) -> np.ndarray:
    """``d_i v_j`` on the grid, shape ``(i, j, N, ...)``."""
    k = box.wavevectors()
    return to_grid(1j * k[:, None] * c[None], box, points)


def trilinear_b(u: DivFreeField, v: DivFreeField, w: DivFreeField, points: int | None = None) -> float:
    """``b(u, v, w) = sum_ij int u_i (d_i v_j) w_j dx`` by grid quadrature."""
    u._same(v)
    u._same(w)
    box = u.box
    N = points or box.product_points
    if N < 3 * box.K + 1:
        raise InputError(f"b needs at least {3 * box.K + 1} points per axis, got {N}")
    ug = to_grid(u.coeffs, box, N)
    dv = _gradients(v.coeffs, box, N)
    wg = to_grid(w.coeffs, box, N)
    integrand = np.einsum("i...,ij...,j...->...", ug, dv, wg)
    return float(integrand.sum() * (2 * np.pi / N) ** box.dims)


def convection(c: np.ndarray, box: PeriodicBox, points: int | None = None) -> np.ndarray:
    """Leray projection of ``(y . grad) y`` onto the retained modes."""
    N = points or box.product_points
    yg = to_grid(c, box, N)
    dy = _gradients(c, box, N)
    adv = np.einsum("i...,ij...->j...", yg, dy)
    return _leray(box, from_grid(adv, box))


def galerkin_truncate(y0: DivFreeField, n: int) -> DivFreeField:
    """Keep wavevectors with ``max_i |k_i| <= n``."""
    if int(n) != n or n < 1:
        raise InputError(f"truncation radius must be an integer >= 1, got {n}")
    if n > y0.box.K:
        raise InputError(f"truncation radius {n} exceeds the box radius {y0.box.K}")
    keep = y0.box.radius() <= n
    return DivFreeField(y0.box, np.where(keep, y0.coeffs, 0.0), check=False)


def l4_norm(v: DivFreeField, points: int | None = None) -> float:
    """``(int |v|^4 dx)^(1/4)``; exact for ``points >= 4K + 1``."""
    N = points or v.box.quartic_points
    g = v.on_grid(N)
    s = np.sum(g**2, axis=0)
    return float((np.sum(s**2) * (2 * np.pi / N) ** v.box.dims) ** 0.25)


# ---------------------------------------------------------------- integration


def _forcing_series(f, box: PeriodicBox, grid: TimeGrid):
    """Projected forcing coefficients per time node, or ``None`` for ``f = 0``."""
    if f is None:
        return None
    n = grid.steps + 1
    if isinstance(f, DivFreeField):
        f._same(box.zero())
        c = leray_project(f.coeffs, box).coeffs
        return np.broadcast_to(c, (n,) + c.shape)
    if callable(f):
        seq = [f(t) for t in grid.nodes]
    else:
        seq = list(f)
    if len(seq) != n:
        raise InputError(f"forcing needs one field per time node ({n}), got {len(seq)}")
    out = np.empty((n,) + box.shape, dtype=complex)
    for m, fm in enumerate(seq):
        raw = fm.coeffs if isinstance(fm, DivFreeField) else np.asarray(fm)
        out[m] = leray_project(raw, box).coeffs
    return out


@dataclass(frozen=True)
class GalerkinTrajectory:
    box: PeriodicBox
    times: np.ndarray
    coeffs: np.ndarray                 # (nodes, d, 2K+1, ...)
    nu: float
    forcing: np.ndarray | None = None  # projected forcing per node, None when f = 0

    def at(self, m: int) -> DivFreeField:
        return DivFreeField(self.box, self.coeffs[m], check=False)

    @property
    def final(self) -> DivFreeField:
        return self.at(-1)

    def l2_norms(self) -> np.ndarray:
        axes = tuple(range(1, self.coeffs.ndim))
        return np.sqrt(self.box.volume * np.sum(np.abs(self.coeffs) ** 2, axis=axes))

    def grad_norms(self) -> np.ndarray:
        axes = tuple(range(1, self.coeffs.ndim))
        return np.sqrt(self.box.volume * np.sum(self.box.k_squared() * np.abs(self.coeffs) ** 2, axis=axes))

    def divergence_ratios(self) -> np.ndarray:
        return np.array([self.at(m).divergence_ratio() for m in range(len(self.times))])

    def energy_terms(self) -> tuple:
        """Running ``|y(t)|^2 - |y0|^2`` and ``2 int_0^t (nu ||grad y||^2 - (f, y)) ds`` per node.

        The time integral uses the composite Simpson rule on pairs of steps
        (trapezoid on a trailing odd step).
        """
        e = self.l2_norms() ** 2
        rate = 2 * self.nu * self.grad_norms() ** 2
        if self.forcing is not None:
            axes = tuple(range(1, self.coeffs.ndim))
            rate = rate - 2 * self.box.volume * np.real(np.sum(self.forcing * np.conj(self.coeffs), axis=axes))
        t = self.times
        cum = np.zeros_like(t)
        for m in range(1, len(t)):
            if m % 2 == 0:
                h = t[m] - t[m - 2]
                cum[m] = cum[m - 2] + h / 6 * (rate[m - 2] + 4 * rate[m - 1] + rate[m])
            else:
                cum[m] = cum[m - 1] + 0.5 * (t[m] - t[m - 1]) * (rate[m - 1] + rate[m])
        return e - e[0], cum

    def energy_residual(self) -> float:
        """``| |y(T)|^2 - |y0|^2 + 2 int (nu ||grad y||^2 - (f, y)) dt |``."""
        de, cum = self.energy_terms()
        return float(abs(de[-1] + cum[-1]))

    def l4_norms(self, points: int | None = None) -> np.ndarray:
        return np.array([l4_norm(self.at(m), points) for m in range(len(self.times))])


def ns_evolve(y0: DivFreeField, f, nu: float, grid: TimeGrid, points: int | None = None) -> GalerkinTrajectory:
    """Integrate the Galerkin system with the integrating-factor RK4 (Lawson) scheme.

    ``dy/dt = -nu |k|^2 y - P[(y . grad) y] + f``.  The viscous factor
    ``exp(-nu |k|^2 dt)`` is applied exactly.  ``f`` may be ``None``, a
    single field, one field per node, or a callable of time; it is
    Leray-projected here and interpolated linearly at half steps.
    """
    if not np.isfinite(nu) or nu <= 0:
        raise InputError(f"viscosity must be > 0, got {nu}")
    box = y0.box
    fs = _forcing_series(f, box, grid)
    h = grid.dt
    visc = nu * box.k_squared()
    E1 = np.exp(-visc * h)
    E2 = np.exp(-visc * h / 2)

    def rhs(c, m, half):
        out = -convection(c, box, points)
        if fs is not None:
            out = out + (0.5 * (fs[m] + fs[m + 1]) if half else fs[m])
        return out

    out = np.empty((grid.steps + 1,) + box.shape, dtype=complex)
    y = np.array(y0.coeffs)
    out[0] = y
    ref = y0.l2_norm()
    limit = BLOWUP_FACTOR * ref if ref > 0 else np.inf
    for m in range(grid.steps):
        a = rhs(y, m, False)
        y2 = E2 * (y + 0.5 * h * a)
        b = rhs(y2, m, True)
        y3 = E2 * y + 0.5 * h * b
        c = rhs(y3, m, True)
        y4 = E1 * y + h * E2 * c
        d = rhs(y4, m + 1, False)
        y = E1 * y + h / 6 * (E1 * a + 2 * E2 * (b + c) + d)
        norm = np.sqrt(box.volume * np.sum(np.abs(y) ** 2))
        if not np.isfinite(norm) or norm > limit:
            raise DivergenceError(f"|y| = {norm:.3e} exceeds {BLOWUP_FACTOR:.0e} |y0| at t = {grid.nodes[m + 1]:.4g}")
        out[m + 1] = y
    return GalerkinTrajectory(box, grid.nodes, out, float(nu), None if fs is None else np.array(fs))


def taylor_green(box: PeriodicBox, amplitude: float = 1.0) -> DivFreeField:
    """2-D ``(sin x cos y, -cos x sin y)``, an exact decaying solution at ``|k|^2 = 2``."""
    if box.dims != 2:
        raise InputError("the Taylor-Green vortex is two-dimensional")
    c = np.zeros(box.shape, dtype=complex)
    K = box.K
    # sin x cos y = sum over kx, ky = +-1 of (sign(kx) / 4i) e^{i k.x}
    for kx in (-1, 1):
        for ky in (-1, 1):
            c[0, K + kx, K + ky] = kx / 4j
            c[1, K + kx, K + ky] = -ky / 4j
    return DivFreeField(box, amplitude * c)


def taylor_green_exact(box: PeriodicBox, nu: float, t, amplitude: float = 1.0) -> np.ndarray:
    """Coefficients of the Taylor-Green solution at times ``t``."""
    c = taylor_green(box, amplitude).coeffs
    t = np.atleast_1d(np.asarray(t, dtype=float))
    return np.exp(-2 * nu * t).reshape((-1,) + (1,) * c.ndim) * c


# ------------------------------------------------------------- experiments


@dataclass(frozen=True)
class UniquenessResult:
    n_list: tuple
    times: np.ndarray
    distances: np.ndarray          # (len(n_list), nodes): |y(t) - y_n(t)|
    initial_gaps: np.ndarray       # |y0 - y0_n|
    D: np.ndarray                  # sup_t distances
    C: np.ndarray                  # smallest Gronwall exponent; nan when the initial gap is 0
    sup_l4: float                  # sup_t ||y(t)||_{L4} of the reference run
    reference: GalerkinTrajectory

    @property
    def decreasing(self) -> bool:
        return bool(np.all(np.diff(self.D) < 0))

    @property
    def nonincreasing(self) -> bool:
        return bool(np.all(np.diff(self.D) <= 0))


def gronwall_exponent(times: np.ndarray, dist: np.ndarray, gap: float) -> float:
    """Smallest ``C`` with ``dist(t)^2 <= exp(C t) gap^2`` on every node ``t > 0``."""
    if gap == 0:
        return float("nan")
    t = times[1:]
    with np.errstate(divide="ignore"):
        ratios = 2 * np.log(np.maximum(dist[1:], 1e-300) / gap) / t
    return float(np.max(ratios))


def uniqueness_experiment(y0: DivFreeField, f, nu: float, n_list: Sequence[int], grid: TimeGrid,
                          points: int | None = None) -> UniquenessResult:
    """Compare the run from ``y0`` with runs from ``galerkin_truncate(y0, n)``.

    Every run uses the full radius ``K``, so ``D_n`` isolates the effect of
    the truncated data; ``D_K = 0`` identically.
    """
    n_list = tuple(int(n) for n in n_list)
    if not n_list or list(n_list) != sorted(set(n_list)):
        raise InputError("n_list must be strictly ascending")
    if n_list[0] < 1 or n_list[-1] > y0.box.K:
        raise InputError(f"n_list entries must lie in [1, {y0.box.K}]")
    ref = ns_evolve(y0, f, nu, grid, points)
    axes = tuple(range(1, ref.coeffs.ndim))
    dists, gaps, C = [], [], []
    for n in n_list:
        yn0 = galerkin_truncate(y0, n)
        run = ns_evolve(yn0, f, nu, grid, points)
        d = np.sqrt(y0.box.volume * np.sum(np.abs(ref.coeffs - run.coeffs) ** 2, axis=axes))
        gap = (y0 - yn0).l2_norm()
        dists.append(d)
        gaps.append(gap)
        C.append(gronwall_exponent(grid.nodes, d, gap))
    dists = np.array(dists)
    return UniquenessResult(n_list, grid.nodes, dists, np.array(gaps), dists.max(axis=1), np.array(C),
                            float(ref.l4_norms().max()), ref)


LADYZHENSKAYA_CONSTANT = np.sqrt(2.0)


def ladyzhenskaya_ratio(v: DivFreeField, points: int | None = None) -> float:
    """``||v||_{L4} / (sqrt(2) |v|^{1/4} ||grad v||^{3/4})`` for a nonzero 3-D field."""
    if v.box.dims != 3:
        raise InputError("the ratio is defined for three-dimensional fields")
    l2 = v.l2_norm()
    if l2 == 0:
        raise DegenerateInputError("zero field")
    return l4_norm(v, points) / (LADYZHENSKAYA_CONSTANT * l2**0.25 * v.grad_norm() ** 0.75)


@dataclass(frozen=True)
class LadyzhenskayaResult:
    ratios: np.ndarray
    ratios_fine: np.ndarray        # same fields at twice the quadrature points
    points: tuple

    @property
    def max_ratio(self) -> float:
        return float(self.ratios.max())

    @property
    def quadrature_gap(self) -> float:
        return float(np.max(np.abs(self.ratios - self.ratios_fine)))

    @property
    def exceeds_one(self) -> bool:
        return bool(self.max_ratio > 1.0)


def ladyzhenskaya_check(fields: Sequence[DivFreeField], points: int | None = None) -> LadyzhenskayaResult:
    """Ratios for each field at two quadrature resolutions; nothing is asserted."""
    if not fields:
        raise InputError("need at least one field")
    N = points or fields[0].box.quartic_points
    coarse = np.array([ladyzhenskaya_ratio(v, N) for v in fields])
    fine = np.array([ladyzhenskaya_ratio(v, 2 * N) for v in fields])
    return LadyzhenskayaResult(coarse, fine, (N, 2 * N))


def single_mode(box: PeriodicBox, k: Sequence[int], direction: Sequence[float], phase: complex = 1.0) -> DivFreeField:
    """``2 Re(phase e^{i k.x}) a`` for a unit vector ``a`` orthogonal to ``k``."""
    k = np.asarray(k, dtype=int)
    a = np.asarray(direction, dtype=float)
    if k.shape != (box.dims,) or a.shape != (box.dims,):
        raise InputError("k and direction need one entry per axis")
    if np.max(np.abs(k)) > box.K or not np.any(k):
        raise InputError(f"k must be nonzero with |k_i| <= {box.K}")
    if abs(k @ a) > 1e-14 * np.linalg.norm(a) * np.linalg.norm(k):
        raise InputError("direction must be orthogonal to k")
    c = np.zeros(box.shape, dtype=complex)
    K = box.K
    c[(slice(None),) + tuple(K + k)] = phase * a
    c[(slice(None),) + tuple(K - k)] = np.conj(phase) * a
    return DivFreeField(box, c)
