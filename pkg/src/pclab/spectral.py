"""Dirichlet sine eigenbasis on axis-aligned boxes.

A box ``(0, L_1) x ... x (0, L_d)`` carries the eigenfunctions

    e_k(x) = prod_i sin(k_i pi x_i / L_i),   k_i >= 1,

of ``-Laplacian`` with homogeneous Dirichlet conditions and eigenvalues
``sum_i (k_i pi / L_i)**2``.  Fields are stored either as coefficients in
this basis (:class:`SpectralField`) or as values on the uniform interior
grid ``x_j = j L / (n + 1)``, ``j = 1..n`` (:class:`NodalField`).  On that
grid the discrete sine transform of type I is exact for the first ``n``
modes, which is what makes the nodal <-> spectral round trip lossless.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Union

import numpy as np
from scipy import fft as sfft

from .errors import InputError

NORMS = ("L2", "L4", "H1_0", "H_minus1")


def _as_tuple(value, dims, name, kind=float):
    if np.isscalar(value):
        return (kind(value),) * dims
    out = tuple(kind(v) for v in value)
    if len(out) != dims:
        raise InputError(f"{name} has {len(out)} entries, expected {dims}")
    return out


def _frozen(a, dtype=float):
    a = np.array(a, dtype=dtype)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class BoxDomain:
    """Box ``prod_i (0, lengths[i])`` with ``grid_points[i]`` interior nodes per axis."""

    dims: int
    lengths: tuple
    grid_points: tuple

    def __init__(self, dims: int, lengths=np.pi, grid_points=64):
        if dims not in (1, 2, 3):
            raise InputError(f"dims must be 1, 2 or 3, got {dims}")
        lengths = _as_tuple(lengths, dims, "lengths")
        grid_points = _as_tuple(grid_points, dims, "grid_points", int)
        if any(not np.isfinite(L) or L <= 0 for L in lengths):
            raise InputError(f"all lengths must be > 0, got {lengths}")
        if any(n < 4 for n in grid_points):
            raise InputError(f"all grid_points must be >= 4, got {grid_points}")
        object.__setattr__(self, "dims", int(dims))
        object.__setattr__(self, "lengths", lengths)
        object.__setattr__(self, "grid_points", grid_points)

    @property
    def spacing(self) -> tuple:
        return tuple(L / (n + 1) for L, n in zip(self.lengths, self.grid_points))

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))

    @property
    def volume(self) -> float:
        return float(np.prod(self.lengths))

    def axis_nodes(self, axis: int) -> np.ndarray:
        n = self.grid_points[axis]
        return self.lengths[axis] * np.arange(1, n + 1) / (n + 1)

    def mesh(self) -> list:
        return np.meshgrid(*[self.axis_nodes(i) for i in range(self.dims)], indexing="ij")

    def with_grid(self, grid_points) -> "BoxDomain":
        return BoxDomain(self.dims, self.lengths, grid_points)

    def refined(self, factor: int = 2) -> "BoxDomain":
        """Same box, ``factor`` times as many cells per axis (nodes stay nested)."""
        return self.with_grid(tuple(factor * (n + 1) - 1 for n in self.grid_points))

    def same_box(self, other: "BoxDomain") -> bool:
        return self.dims == other.dims and np.allclose(self.lengths, other.lengths, rtol=0, atol=1e-15)


@dataclass(frozen=True)
class TimeGrid:
    """Uniform nodes ``t_m = m T / steps``, ``m = 0..steps``."""

    horizon: float
    steps: int

    def __post_init__(self):
        if not np.isfinite(self.horizon) or self.horizon <= 0:
            raise InputError(f"horizon must be > 0, got {self.horizon}")
        if int(self.steps) != self.steps or self.steps < 1:
            raise InputError(f"steps must be a positive integer, got {self.steps}")
        object.__setattr__(self, "horizon", float(self.horizon))
        object.__setattr__(self, "steps", int(self.steps))

    @property
    def dt(self) -> float:
        return self.horizon / self.steps

    @property
    def nodes(self) -> np.ndarray:
        t = self.horizon * np.arange(self.steps + 1) / self.steps
        t[-1] = self.horizon
        return t

    def refined(self, factor: int = 2) -> "TimeGrid":
        return TimeGrid(self.horizon, factor * self.steps)


@dataclass(frozen=True)
class SpectralField:
    """Coefficients of a scalar field in the Dirichlet sine basis of ``domain``.

    ``coeffs[k_1 - 1, ..., k_d - 1]`` multiplies ``e_k``.
    """

    domain: BoxDomain
    coeffs: np.ndarray = field(repr=False)

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=float)
        if c.ndim != self.domain.dims:
            raise InputError(f"coefficient array has {c.ndim} axes, domain has {self.domain.dims}")
        if not np.all(np.isfinite(c)):
            raise InputError("coefficients must be finite")
        object.__setattr__(self, "coeffs", _frozen(c))

    @property
    def mode_cap(self) -> tuple:
        return self.coeffs.shape

    def __add__(self, other):
        _check_same_box(self.domain, other.domain)
        a, b = _pad_common(self.coeffs, other.coeffs)
        return SpectralField(self.domain, a + b)

    def __sub__(self, other):
        return self + (-1.0) * other

    def __mul__(self, scalar):
        return SpectralField(self.domain, float(scalar) * self.coeffs)

    __rmul__ = __mul__

    def __neg__(self):
        return (-1.0) * self

    def truncated(self, mode_cap) -> "SpectralField":
        """Zero-padded or truncated copy with the given per-axis mode cap."""
        cap = _as_tuple(mode_cap, self.domain.dims, "mode_cap", int)
        out = np.zeros(cap)
        sl = tuple(slice(0, min(a, b)) for a, b in zip(cap, self.mode_cap))
        out[sl] = self.coeffs[sl]
        return SpectralField(self.domain, out)

    def on(self, domain: BoxDomain) -> "SpectralField":
        """Rebind the coefficients to another grid of the same box."""
        _check_same_box(self.domain, domain)
        return SpectralField(domain, self.coeffs)


@dataclass(frozen=True)
class NodalField:
    """Values on the uniform interior grid of ``domain``."""

    domain: BoxDomain
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != self.domain.grid_points:
            raise InputError(f"values have shape {v.shape}, domain grid is {self.domain.grid_points}")
        if not np.all(np.isfinite(v)):
            raise InputError("nodal values must be finite")
        object.__setattr__(self, "values", _frozen(v))


Field = Union[SpectralField, NodalField]


def _check_same_box(a: BoxDomain, b: BoxDomain):
    if not a.same_box(b):
        raise InputError(f"domain mismatch: {a.lengths} vs {b.lengths}")


def _pad_common(a: np.ndarray, b: np.ndarray):
    if a.shape == b.shape:
        return a, b
    shape = tuple(max(p, q) for p, q in zip(a.shape, b.shape))
    out = []
    for x in (a, b):
        y = np.zeros(shape)
        y[tuple(slice(0, s) for s in x.shape)] = x
        out.append(y)
    return out


def normalize_mode_cap(mode_cap, domain: BoxDomain) -> tuple:
    cap = _as_tuple(mode_cap, domain.dims, "mode_cap", int)
    if any(m < 1 for m in cap):
        raise InputError(f"mode_cap must be >= 1 per axis, got {cap}")
    return cap


@lru_cache(maxsize=64)
def _sine_matrix(length: float, n: int, modes: int) -> np.ndarray:
    x = length * np.arange(1, n + 1) / (n + 1)
    k = np.arange(1, modes + 1)
    S = np.sin(np.outer(x, k) * (np.pi / length))
    S.setflags(write=False)
    return S


def _apply_axes(mats, arr, lead=0):
    """Contract axis ``lead + i`` of ``arr`` with ``mats[i]`` (rows = output)."""
    for i, M in enumerate(mats):
        arr = np.moveaxis(np.tensordot(M, arr, axes=([1], [lead + i])), 0, lead + i)
    return arr


def synthesize(coeffs: np.ndarray, domain: BoxDomain, lead: int = 0) -> np.ndarray:
    """Evaluate sine series on the interior grid of ``domain``.

    ``lead`` leading axes (e.g. time) are carried through untouched.
    """
    shape = coeffs.shape[lead:]
    mats = [_sine_matrix(L, n, m) for L, n, m in zip(domain.lengths, domain.grid_points, shape)]
    return _apply_axes(mats, np.asarray(coeffs, dtype=float), lead)


def analyze(values: np.ndarray, domain: BoxDomain, mode_cap, lead: int = 0) -> np.ndarray:
    """Discrete sine expansion (DST-I) of grid values, truncated to ``mode_cap``."""
    values = np.asarray(values, dtype=float)
    axes = tuple(range(lead, lead + domain.dims))
    c = sfft.dstn(values, type=1, axes=axes)
    c /= np.prod([n + 1 for n in domain.grid_points])
    sl = (slice(None),) * lead + tuple(slice(0, m) for m in mode_cap)
    return np.ascontiguousarray(c[sl])


def to_spectral(f: NodalField, mode_cap=None) -> SpectralField:
    """Discrete sine expansion of ``f``, keeping ``mode_cap`` modes per axis.

    ``mode_cap`` defaults to the grid size (all resolvable modes), which
    makes the transform exactly invertible.
    """
    if not isinstance(f, NodalField):
        raise InputError("to_spectral expects a NodalField")
    dom = f.domain
    cap = dom.grid_points if mode_cap is None else normalize_mode_cap(mode_cap, dom)
    if any(m > n for m, n in zip(cap, dom.grid_points)):
        raise InputError(f"mode_cap {cap} exceeds grid_points {dom.grid_points}")
    return SpectralField(dom, analyze(f.values, dom, cap))


def from_spectral(c: SpectralField, domain: BoxDomain | None = None) -> NodalField:
    """Pointwise synthesis of ``c`` on its own grid, or on ``domain`` if given."""
    dom = c.domain if domain is None else domain
    _check_same_box(c.domain, dom)
    return NodalField(dom, synthesize(c.coeffs, dom))


def project(fn, domain: BoxDomain, mode_cap=None) -> SpectralField:
    """Sample a callable ``fn(*mesh)`` on the grid and expand it."""
    return to_spectral(NodalField(domain, fn(*domain.mesh())), mode_cap)


def basis_field(domain: BoxDomain, k, amplitude: float = 1.0, mode_cap=None) -> SpectralField:
    """``amplitude * e_k`` as a spectral field."""
    k = _as_tuple(k, domain.dims, "k", int)
    if any(ki < 1 for ki in k):
        raise InputError(f"mode indices must be >= 1, got {k}")
    cap = k if mode_cap is None else normalize_mode_cap(mode_cap, domain)
    if any(ki > m for ki, m in zip(k, cap)):
        raise InputError(f"mode {k} outside mode_cap {cap}")
    c = np.zeros(cap)
    c[tuple(ki - 1 for ki in k)] = amplitude
    return SpectralField(domain, c)


def constant_coefficients(domain: BoxDomain, mode_cap, value: float = 1.0) -> np.ndarray:
    """Exact sine coefficients of a constant: ``prod_i 4/(k_i pi)`` over odd ``k``."""
    cap = normalize_mode_cap(mode_cap, domain)
    out = np.array(float(value))
    for m in cap:
        k = np.arange(1, m + 1)
        c1 = np.where(k % 2 == 1, 4.0 / (k * np.pi), 0.0)
        out = np.multiply.outer(out, c1)
    return out


def laplacian_eigenvalue(k, domain: BoxDomain) -> float:
    """``sum_i (k_i pi / L_i)**2`` for the Dirichlet mode ``k``."""
    k = _as_tuple(k, domain.dims, "k", int)
    if any(ki < 1 for ki in k):
        raise InputError(f"mode indices must be >= 1, got {k}")
    return float(sum((ki * np.pi / L) ** 2 for ki, L in zip(k, domain.lengths)))


def eigenvalues(domain: BoxDomain, mode_cap) -> np.ndarray:
    """Array of Laplacian eigenvalues laid out like a coefficient array."""
    cap = normalize_mode_cap(mode_cap, domain)
    lam = np.zeros(cap)
    for i, (m, L) in enumerate(zip(cap, domain.lengths)):
        shape = [1] * domain.dims
        shape[i] = m
        lam = lam + ((np.arange(1, m + 1) * np.pi / L) ** 2).reshape(shape)
    return lam


def smallest_eigenvalue(domain: BoxDomain) -> float:
    return laplacian_eigenvalue((1,) * domain.dims, domain)


def _basis_weight(domain: BoxDomain) -> float:
    # ||e_k||^2 on the box
    return float(np.prod(domain.lengths)) / 2.0 ** domain.dims


def _nodal_power_integral(values: np.ndarray, domain: BoxDomain, p: int) -> float:
    # trapezoid rule; boundary nodes carry zero by the Dirichlet condition
    return float(domain.cell_volume * np.sum(np.abs(values) ** p))


def norm(f: Field, which: str = "L2") -> float:
    """L2, L4, H1_0 or H_minus1 norm of a spectral or nodal field.

    Spectral fields use Parseval for L2, H1_0 (``sum lam c^2``) and
    H_minus1 (``sum c^2 / lam``); L4 always goes through composite
    quadrature on the nodal grid.
    """
    if which not in NORMS:
        raise InputError(f"unknown norm {which!r}; expected one of {NORMS}")
    if isinstance(f, NodalField):
        if which == "L2":
            return float(np.sqrt(_nodal_power_integral(f.values, f.domain, 2)))
        if which == "L4":
            return float(_nodal_power_integral(f.values, f.domain, 4) ** 0.25)
        return norm(to_spectral(f), which)
    if not isinstance(f, SpectralField):
        raise InputError(f"cannot take a norm of {type(f).__name__}")
    if which == "L4":
        return norm(from_spectral(f), "L4")
    c2 = f.coeffs**2
    if which == "H1_0":
        c2 = c2 * eigenvalues(f.domain, f.mode_cap)
    elif which == "H_minus1":
        c2 = c2 / eigenvalues(f.domain, f.mode_cap)
    return float(np.sqrt(_basis_weight(f.domain) * np.sum(c2)))


def inner_product(f: Field, g: Field) -> float:
    """L2 scalar product; spectral pairs use coefficients, nodal pairs quadrature."""
    _check_same_box(f.domain, g.domain)
    if isinstance(f, SpectralField) and isinstance(g, SpectralField):
        a, b = _pad_common(f.coeffs, g.coeffs)
        return float(_basis_weight(f.domain) * np.sum(a * b))
    fv = f.values if isinstance(f, NodalField) else from_spectral(f).values
    dom = f.domain
    if isinstance(g, NodalField):
        gv = g.values
        dom = g.domain
        if isinstance(f, SpectralField):
            fv = from_spectral(f, dom).values
    else:
        gv = from_spectral(g, dom).values
    if fv.shape != gv.shape:
        raise InputError(f"grid mismatch: {fv.shape} vs {gv.shape}")
    return float(dom.cell_volume * np.sum(fv * gv))


def coefficient_norms(coeffs: np.ndarray, domain: BoxDomain, lead: int = 1) -> np.ndarray:
    """L2 norms of a stack of coefficient arrays (leading axes kept)."""
    axes = tuple(range(lead, coeffs.ndim))
    return np.sqrt(_basis_weight(domain) * np.sum(coeffs**2, axis=axes))

