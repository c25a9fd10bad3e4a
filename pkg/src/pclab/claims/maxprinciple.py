"""Final-time maximum principle: ``z_t - Lap z = -beta' w`` with ``z(0) <= 0`` ends with ``z(T) <= 0``.

The weight ``beta`` need not be increasing; only its maximum must sit at
``T``.  The experiment solves ``w`` and then ``z`` with the spectral
integrators and reports the largest nodal value of ``z(T)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import PreconditionError
from ..evolution import SourceSpec, evolve_coefficients, parabolic_evolve
from ..spectral import BoxDomain, SpectralField, TimeGrid, basis_field, eigenvalues, synthesize
from .beta import BetaProfile

SIGN_TOL = 1e-8


@dataclass(frozen=True)
class SupersolutionSpec:
    """``w_t - Lap w = g`` with ``w(0) = w0``; both data nonnegative."""

    w0: SpectralField
    g: SourceSpec

    def violations(self, grid: TimeGrid, tol: float = 1e-12) -> list:
        out = []
        w0_nodal = synthesize(self.w0.coeffs, self.w0.domain)
        if w0_nodal.min() < -tol * max(1.0, float(np.abs(w0_nodal).max())):
            out.append("w(0) >= 0")
        g = self.g.sample_series(self.w0.domain, grid)
        if g.size and g.min() < -tol * max(1.0, float(np.abs(g).max())):
            out.append("w_t - Lap w >= 0")
        return out

    def trajectory(self, grid: TimeGrid, mode_cap=None):
        w0 = self.w0 if mode_cap is None else self.w0.truncated(mode_cap)
        return parabolic_evolve(w0, self.g, grid)


@dataclass(frozen=True)
class MaxPrincipleResult:
    z_final: SpectralField
    max_z: float
    scale: float
    tol: float

    @property
    def margin(self) -> float:
        """Normalised sign margin; the claim holds when this is <= tol."""
        return self.max_z / self.scale if self.scale > 0 else self.max_z

    @property
    def passed(self) -> bool:
        return self.max_z <= self.tol * self.scale


def check_preconditions(beta: BetaProfile, w_spec: SupersolutionSpec, z0: SpectralField, grid: TimeGrid):
    problems = beta.violations()
    problems += w_spec.violations(grid)
    z0_nodal = synthesize(z0.coeffs, z0.domain)
    if z0_nodal.max() > 1e-12 * max(1.0, float(np.abs(z0_nodal).max())):
        problems.append("z(0) <= 0")
    if abs(beta.horizon - grid.horizon) > 1e-12 * grid.horizon:
        problems.append("beta defined on [0, T]")
    if problems:
        raise PreconditionError("max-principle hypotheses violated: " + ", ".join(problems), problems[0])


def max_principle_experiment(beta: BetaProfile, w_spec: SupersolutionSpec, z0: SpectralField,
                             grid: TimeGrid, tol: float = SIGN_TOL) -> MaxPrincipleResult:
    """Solve ``w`` then ``z`` and return ``z(T)`` with its largest nodal value.

    Hypotheses are checked first; a violation raises
    :class:`PreconditionError` rather than producing a verdict.
    """
    check_preconditions(beta, w_spec, z0, grid)
    dom = z0.domain
    w = w_spec.trajectory(grid, z0.mode_cap)
    dbeta = beta.derivative(grid.nodes)
    shape = (-1,) + (1,) * dom.dims
    src = -dbeta.reshape(shape) * w.coeffs
    lam = eigenvalues(dom, z0.mode_cap)
    z = evolve_coefficients(np.asarray(z0.coeffs), lam, src, grid)
    zT = SpectralField(dom, z[-1])
    max_z = float(synthesize(zT.coeffs, dom).max())
    w_nodal = synthesize(w.coeffs, dom, lead=1)
    scale = max(float(np.abs(synthesize(z0.coeffs, dom)).max()),
                float(np.abs(dbeta.reshape(shape) * w_nodal).max()))
    return MaxPrincipleResult(zT, max_z, scale, tol)


def _positive_bump(domain: BoxDomain, mode_cap, a: float, b: float) -> SpectralField:
    """``a e_1 + b prod_i sin^3``: nonnegative and exactly band-limited (modes 1 and 3)."""
    cap = tuple(mode_cap) if np.ndim(mode_cap) else (int(mode_cap),) * domain.dims
    c = np.zeros(cap)
    c[(0,) * domain.dims] += a
    # sin^3 = (3 sin - sin 3x) / 4 per axis
    one = np.zeros(max(cap))
    one[0], one[2] = 0.75, -0.25
    cube = np.array(b)
    for m in cap:
        cube = np.multiply.outer(cube, one[:m])
    return SpectralField(domain, c + cube)


def random_admissible_config(seed: int, domain: BoxDomain, mode_cap, horizon: float = 1.0):
    """Deterministic random ``(beta, w_spec, z0)`` satisfying every hypothesis.

    ``beta`` is a pchip profile through five points with the largest value
    last and an interior dip; ``w0`` is a scaled first eigenfunction; ``g``
    is a nonnegative constant or first eigenfunction; ``z0`` is minus a
    nonnegative band-limited bump (zero in a quarter of the draws).
    """
    rng = np.random.default_rng(seed)
    times = np.linspace(0.0, horizon, 5)
    vals = rng.uniform(0.5, 2.0, 5)
    vals[-1] = vals.max() + rng.uniform(0.05, 1.0)
    beta = BetaProfile(times, vals)
    w0 = basis_field(domain, 1, rng.uniform(0.1, 2.0), mode_cap=mode_cap)
    if rng.random() < 0.5:
        g = SourceSpec.constant(rng.uniform(0.0, 2.0))
    else:
        g = SourceSpec.eigenmode(1, rng.uniform(0.0, 2.0))
    z0 = -1.0 * _positive_bump(domain, mode_cap, rng.uniform(0.0, 1.0), rng.uniform(0.0, 0.5))
    if rng.random() < 0.25:
        z0 = 0.0 * z0
    return beta, SupersolutionSpec(w0, g), z0
