"""Splitting ``y = y1 - y2`` into two problems with positive data.

With ``u1 = u + |u| + c``, ``u2 = |u| + c``, ``y01 = y0 + |y0|`` and
``y02 = |y0|`` both pieces have nonnegative initial data and sources bounded
below by ``c``.  Each is compared with the heat flow ``phi_i`` of its initial
datum through ``lam_i(t) = |y_i(t)| / |phi_i(t)|``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DegenerateInputError, InputError
from ..evolution import SourceSpec, evolve_coefficients
from ..spectral import (
    SpectralField,
    TimeGrid,
    analyze,
    coefficient_norms,
    constant_coefficients,
    eigenvalues,
    synthesize,
)

LINEARITY_TOL = 1e-10
LAMBDA_TOL = 1e-10


@dataclass(frozen=True)
class LambdaTrajectory:
    times: np.ndarray
    lambda1: np.ndarray
    lambda2: np.ndarray
    residual: np.ndarray            # reconstruction, reported only
    linearity_residual: float       # max_t |y - (y1 - y2)| / |y|
    y: np.ndarray                   # coefficient stacks, leading axis = time
    y1: np.ndarray
    y2: np.ndarray

    @property
    def lambda_min(self) -> float:
        return float(min(self.lambda1.min(), self.lambda2.min()))


def split_data(y0: SpectralField, u: SourceSpec, c: float, grid: TimeGrid):
    """Coefficient series for ``(u, u1, u2)`` and initial data ``(y01, y02)``.

    ``|u|`` and ``|y0|`` are formed on the nodal grid of ``y0.domain`` and
    expanded back; ``u`` itself keeps its own coefficients so that
    ``u1 - u2 = u`` holds to round-off.
    """
    dom, cap = y0.domain, y0.mode_cap
    if any(m > n for m, n in zip(cap, dom.grid_points)):
        raise InputError(f"mode_cap {cap} exceeds grid_points {dom.grid_points}")
    u_hat = u.coefficient_series(dom, cap, grid)
    abs_u = analyze(np.abs(u.sample_series(dom, grid)), dom, cap, lead=1)
    c_hat = constant_coefficients(dom, cap, c)
    u1 = u_hat + abs_u + c_hat
    u2 = abs_u + c_hat
    abs_y0 = analyze(np.abs(synthesize(y0.coeffs, dom)), dom, cap)
    return u_hat, u1, u2, np.asarray(y0.coeffs) + abs_y0, abs_y0


def decompose_lambda(y0: SpectralField, u: SourceSpec, c: float, grid: TimeGrid) -> LambdaTrajectory:
    """Solve ``y, y1, y2, phi1, phi2`` and the multipliers ``lam_i(t)``."""
    if not np.isfinite(c) or c <= 0:
        raise InputError(f"c must be > 0, got {c}")
    dom = y0.domain
    lam = eigenvalues(dom, y0.mode_cap)
    u_hat, u1, u2, y01, y02 = split_data(y0, u, c, grid)
    y = evolve_coefficients(np.asarray(y0.coeffs), lam, u_hat, grid)
    y1 = evolve_coefficients(y01, lam, u1, grid)
    y2 = evolve_coefficients(y02, lam, u2, grid)
    decay = np.exp(-np.multiply.outer(grid.nodes, lam))
    phi1 = decay * y01
    phi2 = decay * y02
    n_phi1 = coefficient_norms(phi1, dom)
    n_phi2 = coefficient_norms(phi2, dom)
    if np.any(n_phi1 == 0) or np.any(n_phi2 == 0):
        raise DegenerateInputError("a heat companion phi_i vanished (y0i identically zero after projection)")
    lam1 = coefficient_norms(y1, dom) / n_phi1
    lam2 = coefficient_norms(y2, dom) / n_phi2
    ny = coefficient_norms(y, dom)
    ref = np.where(ny > 0, ny, 1.0)
    shape = (-1,) + (1,) * dom.dims
    recon = lam1.reshape(shape) * phi1 - lam2.reshape(shape) * phi2
    residual = coefficient_norms(y - recon, dom) / ref
    linear = float(np.max(coefficient_norms(y - (y1 - y2), dom) / ref))
    return LambdaTrajectory(grid.nodes, lam1, lam2, residual, linear, y, y1, y2)


@dataclass(frozen=True)
class MollificationResult:
    levels: tuple
    trajectories: tuple
    cauchy_y: np.ndarray          # max_t |y_n(t) - y_next(t)| for consecutive levels
    cauchy_lambda: np.ndarray     # max_t max_i |lam_i^n - lam_i^next|
    rates: np.ndarray             # log2 ratios of consecutive Cauchy distances


def source_mollification_study(u_rough: SourceSpec, levels, y0: SpectralField, grid: TimeGrid,
                               c: float = 1.0) -> MollificationResult:
    """Run :func:`decompose_lambda` for the source truncated at each mode level.

    ``u_rough`` must be a ``spectral_series`` source.  ``y0.mode_cap`` must
    cover the largest level.
    """
    if u_rough.kind != "spectral_series":
        raise InputError("mollification study needs a spectral_series source")
    levels = tuple(int(n) for n in levels)
    if not levels or any(n < 1 for n in levels) or list(levels) != sorted(levels):
        raise InputError("levels must be ascending positive integers")
    if levels[-1] > min(y0.mode_cap):
        raise InputError(f"level {levels[-1]} exceeds mode_cap {y0.mode_cap}")
    coeffs = u_rough.params["coeffs"]
    profile = u_rough.params["time_profile"]
    trajs = []
    for n in levels:
        trunc = np.zeros(coeffs.shape)
        sl = tuple(slice(0, n) for _ in coeffs.shape)
        trunc[sl] = coeffs[sl]
        trajs.append(decompose_lambda(y0, SourceSpec.spectral_series(trunc, profile), c, grid))
    dom = y0.domain
    cy, cl = [], []
    for a, b in zip(trajs[:-1], trajs[1:]):
        cy.append(float(np.max(coefficient_norms(a.y - b.y, dom))))
        cl.append(float(max(np.max(np.abs(a.lambda1 - b.lambda1)), np.max(np.abs(a.lambda2 - b.lambda2)))))
    cy = np.array(cy)
    with np.errstate(divide="ignore", invalid="ignore"):
        rates = np.log2(cy[:-1] / cy[1:]) if cy.size > 1 else np.array([])
    return MollificationResult(levels, tuple(trajs), cy, np.array(cl), rates)
