"""Pointwise and L4 comparison between a heat flow and the heat flow of its squared datum.

``phi`` is the heat flow of ``y0`` and ``Psi`` the heat flow of ``y0**2``.
Since ``phi**2`` is a subsolution of the heat equation with the same
initial value, ``phi**2 <= Psi`` and hence ``||phi||_4^4 <= |Psi|^2``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..evolution import heat_trajectory
from ..spectral import SpectralField, TimeGrid, analyze, coefficient_norms, synthesize

MARGIN_TOL = 1e-6


@dataclass(frozen=True)
class L4Result:
    times: np.ndarray
    pointwise_margin: float          # min over space-time of Psi - phi^2
    pointwise_by_time: np.ndarray
    norm_margin: np.ndarray          # |Psi(t)|^2 - ||phi(t)||_4^4 per node
    pointwise_scale: float
    norm_scale: float
    tol: float

    @property
    def pointwise_passed(self) -> bool:
        return self.pointwise_margin >= -self.tol * self.pointwise_scale

    @property
    def norm_passed(self) -> bool:
        return float(self.norm_margin.min()) >= -self.tol * self.norm_scale

    @property
    def passed(self) -> bool:
        return self.pointwise_passed and self.norm_passed


def l4_comparison(y0: SpectralField, grid: TimeGrid, tol: float = MARGIN_TOL) -> L4Result:
    """Margins of ``phi**2 <= Psi`` and ``||phi||_4^4 <= |Psi|^2`` on every node.

    ``y0**2`` is squared on the nodal grid of ``y0.domain`` and expanded with
    every resolvable mode, so ``Psi(0)`` reproduces ``y0**2`` at the nodes.
    The grid should hold at least four points per retained mode of ``y0``
    for the L4 quadrature to be exact.
    """
    dom = y0.domain
    phi = heat_trajectory(y0, grid)
    phi_nodal = synthesize(phi.coeffs, dom, lead=1)
    sq0 = phi_nodal[0] ** 2
    psi0 = SpectralField(dom, analyze(sq0, dom, dom.grid_points))
    psi = heat_trajectory(psi0, grid)
    psi_nodal = synthesize(psi.coeffs, dom, lead=1)
    axes = tuple(range(1, dom.dims + 1))
    gap = psi_nodal - phi_nodal**2
    by_time = gap.min(axis=axes)
    l4_4 = dom.cell_volume * np.sum(phi_nodal**4, axis=axes)
    norm_margin = coefficient_norms(psi.coeffs, dom) ** 2 - l4_4
    return L4Result(grid.nodes, float(by_time.min()), by_time, norm_margin,
                    float(sq0.max()) if sq0.size else 0.0, float(l4_4[0]), tol)
