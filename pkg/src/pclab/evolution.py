"""Heat and linear parabolic evolution in the sine eigenbasis.

Every mode decouples: ``c_k' = -lam_k c_k + u_k(t)``.  The free part is
propagated exactly.  Sources are sampled at the time nodes and two
integrators are offered for cross-validation:

* ``duhamel``: exact exponential integration of the piecewise-linear
  interpolant of the sampled source,
* ``crank_nicolson``: the trapezoidal rule on the modal ODE system.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import InputError, PreconditionError
from .spectral import (
    BoxDomain,
    SpectralField,
    TimeGrid,
    _frozen,
    analyze,
    coefficient_norms,
    constant_coefficients,
    eigenvalues,
    normalize_mode_cap,
    synthesize,
)

SOURCE_KINDS = ("zero", "constant", "eigenmode", "nodal_series", "banded_random", "spectral_series")
METHODS = ("duhamel", "crank_nicolson")


def _unit_profile(t):
    return np.ones_like(np.asarray(t, dtype=float))


@dataclass(frozen=True)
class SourceSpec:
    """Declarative right-hand side ``u(x, t)``.

    Build instances with the class-method constructors.  ``params`` holds
    the kind-specific data; ``bounds = (c, M)`` declares ``c <= u <= M``.
    """

    kind: str
    params: dict = field(default_factory=dict)
    bounds: Optional[tuple] = None

    def __post_init__(self):
        if self.kind not in SOURCE_KINDS:
            raise InputError(f"unknown source kind {self.kind!r}")
        if self.bounds is not None:
            c, M = (float(b) for b in self.bounds)
            if not (0 < c <= M):
                raise PreconditionError(f"bounds must satisfy 0 < c <= M, got c={c}, M={M}", "bounds.c must be > 0")
            object.__setattr__(self, "bounds", (c, M))

    # constructors -----------------------------------------------------

    @classmethod
    def zero(cls):
        return cls("zero")

    @classmethod
    def constant(cls, value: float, bounds=None):
        return cls("constant", {"value": float(value)}, bounds)

    @classmethod
    def eigenmode(cls, k, amplitude: float = 1.0, time_profile: Callable = None, bounds=None):
        return cls("eigenmode", {"k": tuple(int(i) for i in np.atleast_1d(k)), "amplitude": float(amplitude),
                                 "time_profile": time_profile or _unit_profile}, bounds)

    @classmethod
    def nodal_series(cls, samples, bounds=None):
        """Samples of shape ``(steps + 1, *grid_points)``, one slice per time node."""
        return cls("nodal_series", {"samples": _frozen(samples)}, bounds)

    @classmethod
    def spectral_series(cls, coeffs, time_profile: Callable = None):
        """Fixed spatial coefficients times a scalar time profile.

        Used for rough (H^-1) sources: ``coeffs`` may hold many more modes
        than any solve retains, so truncation doubles as mollification.
        """
        return cls("spectral_series", {"coeffs": _frozen(coeffs), "time_profile": time_profile or _unit_profile})

    @classmethod
    def banded_random(cls, seed: int, c: float, M: float, mode_cap):
        """``(c+M)/2`` plus a random band-limited oscillation bounded by ``(M-c)/2``.

        The oscillation is ``sum_k e_k(x) (a_k cos(w_k t) + b_k sin(w_k t))``
        scaled so that ``sum |a_k| + |b_k|`` is 90 % of the half width; since
        ``|e_k| <= 1`` the declared bounds hold everywhere by construction.
        """
        if not (0 < c <= M):
            raise PreconditionError(f"banded_random needs 0 < c <= M, got c={c}, M={M}", "bounds.c must be > 0")
        cap = tuple(int(m) for m in np.atleast_1d(mode_cap))
        rng = np.random.default_rng(seed)
        a = rng.standard_normal(cap)
        b = rng.standard_normal(cap)
        omega = rng.uniform(0.0, 2 * np.pi, cap)
        half = 0.5 * (M - c)
        total = np.sum(np.abs(a)) + np.sum(np.abs(b))
        scale = 0.9 * half / total if total > 0 else 0.0
        params = {"seed": int(seed), "c": float(c), "M": float(M), "mode_cap": cap,
                  "mean": 0.5 * (c + M), "a": _frozen(a * scale), "b": _frozen(b * scale), "omega": _frozen(omega)}
        return cls("banded_random", params, (c, M))

    # evaluation -------------------------------------------------------

    def coefficient_series(self, domain: BoxDomain, mode_cap, grid: TimeGrid) -> np.ndarray:
        """Sine coefficients at every time node, shape ``(steps + 1, *mode_cap)``."""
        cap = normalize_mode_cap(mode_cap, domain)
        t = grid.nodes
        out = np.zeros((t.size,) + cap)
        p = self.params
        if self.kind == "zero":
            return out
        if self.kind == "constant":
            out[:] = constant_coefficients(domain, cap, p["value"])
            return out
        if self.kind == "eigenmode":
            k = p["k"] if len(p["k"]) == domain.dims else p["k"] * domain.dims
            if any(ki < 1 or ki > m for ki, m in zip(k, cap)):
                raise InputError(f"eigenmode {k} outside mode_cap {cap}")
            out[(slice(None),) + tuple(ki - 1 for ki in k)] = p["amplitude"] * np.asarray(p["time_profile"](t), float)
            return out
        if self.kind == "nodal_series":
            s = p["samples"]
            if s.shape != (t.size,) + domain.grid_points:
                raise InputError(
                    f"nodal_series has shape {s.shape}, expected {(t.size,) + domain.grid_points}")
            if any(m > n for m, n in zip(cap, domain.grid_points)):
                raise InputError(f"mode_cap {cap} exceeds grid_points {domain.grid_points}")
            return analyze(s, domain, cap, lead=1)
        if self.kind == "spectral_series":
            c = p["coeffs"]
            if c.ndim != domain.dims:
                raise InputError("spectral_series coefficients do not match domain dims")
            sl = tuple(slice(0, min(a, b)) for a, b in zip(cap, c.shape))
            spatial = np.zeros(cap)
            spatial[sl] = c[sl]
            return np.multiply.outer(np.asarray(p["time_profile"](t), float), spatial)
        # banded_random
        out[:] = constant_coefficients(domain, cap, p["mean"])
        osc = np.cos(np.multiply.outer(t, p["omega"])) * p["a"] + np.sin(np.multiply.outer(t, p["omega"])) * p["b"]
        sl = (slice(None),) + tuple(slice(0, min(a, b)) for a, b in zip(cap, p["mode_cap"]))
        out[sl] += osc[sl]
        return out

    def sample_series(self, domain: BoxDomain, grid: TimeGrid) -> np.ndarray:
        """Pointwise values of ``u`` on the space-time grid (the function, not its projection)."""
        t = grid.nodes
        shape = (t.size,) + domain.grid_points
        p = self.params
        if self.kind == "zero":
            return np.zeros(shape)
        if self.kind == "constant":
            return np.full(shape, p["value"])
        if self.kind == "nodal_series":
            if p["samples"].shape != shape:
                raise InputError(f"nodal_series has shape {p['samples'].shape}, expected {shape}")
            return np.array(p["samples"])
        if self.kind == "eigenmode":
            k = p["k"] if len(p["k"]) == domain.dims else p["k"] * domain.dims
            return synthesize(self.coefficient_series(domain, k, grid), domain, lead=1)
        if self.kind == "spectral_series":
            return synthesize(self.coefficient_series(domain, p["coeffs"].shape, grid), domain, lead=1)
        osc = np.cos(np.multiply.outer(t, p["omega"])) * p["a"] + np.sin(np.multiply.outer(t, p["omega"])) * p["b"]
        return p["mean"] + synthesize(osc, domain, lead=1)

    def check_bounds(self, domain: BoxDomain, grid: TimeGrid, tol: float = 1e-12):
        """Raise :class:`PreconditionError` unless ``c <= u <= M`` on the full grid."""
        if self.bounds is None:
            return
        c, M = self.bounds
        s = self.sample_series(domain, grid)
        lo, hi = float(s.min()), float(s.max())
        if lo < c - tol:
            raise PreconditionError(f"source minimum {lo:.6g} below declared c={c}", "c <= u")
        if hi > M + tol:
            raise PreconditionError(f"source maximum {hi:.6g} above declared M={M}", "u <= M")


@dataclass(frozen=True)
class Trajectory:
    """Spectral coefficients at every node of a time grid."""

    domain: BoxDomain
    grid: TimeGrid
    coeffs: np.ndarray = field(repr=False)

    def __post_init__(self):
        c = _frozen(self.coeffs)
        if c.shape[0] != self.grid.steps + 1:
            raise InputError(f"{c.shape[0]} fields for {self.grid.steps + 1} time nodes")
        if c.ndim != self.domain.dims + 1:
            raise InputError("trajectory coefficients do not match domain dims")
        object.__setattr__(self, "coeffs", c)

    @property
    def fields(self) -> tuple:
        return tuple(SpectralField(self.domain, c) for c in self.coeffs)

    def __len__(self):
        return self.coeffs.shape[0]

    def at(self, m: int) -> SpectralField:
        return SpectralField(self.domain, self.coeffs[m])

    @property
    def final(self) -> SpectralField:
        return self.at(-1)

    def l2_norms(self) -> np.ndarray:
        return coefficient_norms(self.coeffs, self.domain)

    def nodal(self, domain: BoxDomain | None = None) -> np.ndarray:
        """All nodes synthesized on a grid: shape ``(steps + 1, *grid_points)``."""
        return synthesize(self.coeffs, domain or self.domain, lead=1)


def heat_evolve(y0: SpectralField, t: float) -> SpectralField:
    """Exact heat semigroup: ``c_k -> exp(-lam_k t) c_k``."""
    if not np.isfinite(t) or t < 0:
        raise InputError(f"heat_evolve needs t >= 0, got {t}")
    lam = eigenvalues(y0.domain, y0.mode_cap)
    return SpectralField(y0.domain, np.exp(-lam * t) * y0.coeffs)


def backward_heat(eta_T: SpectralField, s: float, horizon: float) -> SpectralField:
    """Solution at time ``s`` of the backward problem ``-eta_t - Lap eta = 0``, ``eta(T) = eta_T``."""
    if not (0 <= s <= horizon):
        raise InputError(f"backward_heat needs 0 <= s <= T, got s={s}, T={horizon}")
    return heat_evolve(eta_T, horizon - s)


def heat_trajectory(y0: SpectralField, grid: TimeGrid) -> Trajectory:
    lam = eigenvalues(y0.domain, y0.mode_cap)
    decay = np.exp(-np.multiply.outer(grid.nodes, lam))
    return Trajectory(y0.domain, grid, decay * y0.coeffs)


def _phi_weights(a: np.ndarray):
    """``(phi1, psi)`` with ``phi1 = (1 - e^-a)/a`` and ``psi = (a - 1 + e^-a)/a^2``.

    Small arguments use the Taylor series to avoid cancellation.
    """
    a = np.asarray(a, dtype=float)
    small = a < 0.1
    phi1 = np.empty_like(a)
    psi = np.empty_like(a)
    big = ~small
    ab = a[big]
    em = np.expm1(-ab)
    phi1[big] = -em / ab
    psi[big] = (ab + em) / ab**2
    asm = a[small]
    # phi1 = sum (-a)^n/(n+1)!, psi = sum (-a)^n/(n+2)!
    p1 = np.zeros_like(asm)
    p2 = np.zeros_like(asm)
    term = np.ones_like(asm)
    fact1, fact2 = 1.0, 2.0
    for n in range(14):
        p1 += term / fact1
        p2 += term / fact2
        term = term * (-asm)
        fact1 *= n + 2
        fact2 *= n + 3
    phi1[small] = p1
    psi[small] = p2
    return phi1, psi


def evolve_coefficients(c0: np.ndarray, lam: np.ndarray, source: np.ndarray, grid: TimeGrid,
                        method: str = "duhamel") -> np.ndarray:
    """Integrate ``c' = -lam c + s(t)`` over ``grid`` for all modes at once.

    ``source`` holds the source coefficients at every node (leading axis).
    """
    if method not in METHODS:
        raise InputError(f"unknown method {method!r}; expected one of {METHODS}")
    n = grid.steps
    if source.shape != (n + 1,) + c0.shape:
        raise InputError(f"source has shape {source.shape}, expected {(n + 1,) + c0.shape}")
    dt = grid.dt
    out = np.empty((n + 1,) + c0.shape)
    out[0] = c0
    if method == "duhamel":
        a = lam * dt
        decay = np.exp(-a)
        phi1, psi = _phi_weights(a)
        w_left = dt * (phi1 - psi)
        w_right = dt * psi
        for m in range(n):
            out[m + 1] = decay * out[m] + w_left * source[m] + w_right * source[m + 1]
    else:
        half = 0.5 * lam * dt
        num = (1.0 - half) / (1.0 + half)
        gain = 0.5 * dt / (1.0 + half)
        for m in range(n):
            out[m + 1] = num * out[m] + gain * (source[m] + source[m + 1])
    return out


def parabolic_evolve(y0: SpectralField, u: SourceSpec, grid: TimeGrid, method: str = "duhamel") -> Trajectory:
    """Solve ``y_t - Lap y = u`` with ``y(0) = y0`` on the nodes of ``grid``."""
    if not isinstance(u, SourceSpec):
        raise InputError("u must be a SourceSpec")
    dom = y0.domain
    lam = eigenvalues(dom, y0.mode_cap)
    src = u.coefficient_series(dom, y0.mode_cap, grid)
    return Trajectory(dom, grid, evolve_coefficients(np.asarray(y0.coeffs), lam, src, grid, method))


def positivity_check(traj: Trajectory, domain: BoxDomain | None = None) -> float:
    """Minimum nodal value over all space-time nodes of ``traj``."""
    return float(traj.nodal(domain).min())


def decay_rate(field_: SpectralField) -> float:
    """Least-squares slope of ``log|c_k|`` against ``|k|`` over the nonzero modes.

    A crude spectral-smoothness indicator; more negative means smoother.
    """
    c = np.abs(field_.coeffs)
    idx = np.indices(c.shape).reshape(field_.domain.dims, -1).T + 1
    mag = c.ravel()
    keep = mag > 1e-300
    if keep.sum() < 2:
        return float("nan")
    k = np.linalg.norm(idx[keep], axis=1)
    return float(np.polyfit(k, np.log(mag[keep]), 1)[0])

