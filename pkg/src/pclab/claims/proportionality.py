"""Residual of the heat-proportionality relation ``y(t)/|y(t)| = phi(t)/|phi(t)|``.

``y`` solves ``y_t - Lap y = u`` and ``phi`` the heat equation, both from
``y0``.  The residual is measured and reported; nothing here decides
whether the relation holds.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DegenerateInputError, InputError, PreconditionError
from ..evolution import SourceSpec, heat_trajectory, parabolic_evolve
from ..spectral import SpectralField, TimeGrid, coefficient_norms, synthesize


def parallel_residual(a: np.ndarray, b: np.ndarray, weight: float = 1.0) -> float:
    """``|| |b| a - |a| b || / (|a| |b|)`` for coefficient arrays in an orthogonal basis."""
    na = np.sqrt(weight * np.sum(a * a))
    nb = np.sqrt(weight * np.sum(b * b))
    if na == 0 or nb == 0:
        raise DegenerateInputError("proportionality residual needs nonzero fields")
    d = nb * a - na * b
    return float(np.sqrt(weight * np.sum(d * d)) / (na * nb))


@dataclass(frozen=True)
class ProportionalityResult:
    times: np.ndarray
    residual: np.ndarray
    y_norm: np.ndarray
    phi_norm: np.ndarray

    @property
    def final(self) -> float:
        return float(self.residual[-1])


def proportionality_series(y0: SpectralField, u: SourceSpec, grid: TimeGrid,
                           check_bounds: bool = True) -> ProportionalityResult:
    """Residual ``r(t_m)`` at every node of ``grid``.

    With ``check_bounds`` the hypotheses ``y0 >= 0`` and ``0 < c <= u <= M``
    are enforced first (``u`` must declare its bounds).
    """
    dom = y0.domain
    if check_bounds:
        if u.bounds is None:
            raise PreconditionError("source must declare bounds (c, M) with c > 0", "bounds.c must be > 0")
        u.check_bounds(dom, grid)
        y0n = synthesize(y0.coeffs, dom)
        if y0n.min() < -1e-12 * max(1.0, float(np.abs(y0n).max())):
            raise PreconditionError("initial datum must be nonnegative", "y0 >= 0")
    y = parabolic_evolve(y0, u, grid).coeffs
    phi = heat_trajectory(y0, grid).coeffs
    ny = coefficient_norms(y, dom)
    nphi = coefficient_norms(phi, dom)
    if np.any(ny == 0) or np.any(nphi == 0):
        raise DegenerateInputError("|y(t)| or |phi(t)| vanished")
    weight = float(np.prod(dom.lengths)) / 2.0**dom.dims
    r = np.array([parallel_residual(y[m], phi[m], weight) for m in range(y.shape[0])])
    return ProportionalityResult(grid.nodes, r, ny, nphi)


def proportionality_residual(y0: SpectralField, u: SourceSpec, t: float, steps: int = 64,
                             check_bounds: bool = True) -> float:
    """``r(t)`` for a single time, on a uniform grid of ``steps`` intervals."""
    if not np.isfinite(t) or t <= 0:
        raise InputError(f"t must be > 0, got {t}")
    return proportionality_series(y0, u, TimeGrid(t, steps), check_bounds).final
