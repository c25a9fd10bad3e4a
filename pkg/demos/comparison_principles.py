"""
Final-time sign of z and the heat-proportionality residual
==========================================================

Two statements about linear heat problems are probed here.

The first: if ``w`` is a supersolution with nonnegative data and ``beta`` is a
positive weight whose largest value is reached at the final time, then the
solution of ``z_t - Lap z = -beta' w`` started from ``z0 <= 0`` satisfies
``z(T) <= 0``.  A weight with an interior dip is the interesting case,
because ``beta'`` changes sign.

The second: whether the solution with source ``u`` stays parallel to the
free heat flow.  The residual ``r(t)`` vanishes for a single eigenmode and is
visibly nonzero once ``u`` excites other modes.
"""
import numpy as np

from pclab import BoxDomain, SourceSpec, TimeGrid, basis_field
from pclab.claims import (
    BetaProfile,
    SupersolutionSpec,
    decompose_lambda,
    l4_comparison,
    max_principle_experiment,
    proportionality_residual,
    random_admissible_config,
)
from pclab.errors import PreconditionError

dom = BoxDomain(1, np.pi, 127)
grid = TimeGrid(1.0, 200)

beta = BetaProfile([0.0, 0.25, 0.5, 0.75, 1.0], [1.0, 1.4, 0.8, 1.2, 1.6])
w = SupersolutionSpec(basis_field(dom, 1, mode_cap=64), SourceSpec.constant(1.0))
z0 = basis_field(dom, 1, -0.1, mode_cap=64)
res = max_principle_experiment(beta, w, z0, grid)
print(f"dip weight: max z(T) = {res.max_z:.3e}, normalised margin {res.margin:.3e}, passed {res.passed}")

# A weight whose maximum sits in the interior is refused, with the failed hypothesis named.
try:
    max_principle_experiment(BetaProfile([0.0, 0.5, 1.0], [1.0, 2.0, 1.5], validate=False), w, z0, grid)
except PreconditionError as exc:
    print("rejected:", exc.inequality)

# Random admissible configurations.
margins = []
for seed in range(20):
    b, ws, z = random_admissible_config(seed, dom, 32)
    margins.append(max_principle_experiment(b, ws, z, TimeGrid(1.0, 100)).margin)
print(f"20 random configurations: worst margin {max(margins):.3e}")

# Proportionality residual.
fine = BoxDomain(1, np.pi, 1023)
y0 = basis_field(fine, 1, mode_cap=256)
r_mixed = proportionality_residual(y0, SourceSpec.constant(1.0, bounds=(1.0, 1.0)), 1.0, steps=16)
r_single = proportionality_residual(y0, SourceSpec.eigenmode(1, 0.5), 1.0, check_bounds=False)
print(f"r(1) with u = 1: {r_mixed:.12f};  with u = sin x / 2: {r_single:.1e}")

# The lambda decomposition splits y into two positive pieces.
lam = decompose_lambda(basis_field(dom, 1, mode_cap=64), SourceSpec.constant(1.0, bounds=(1.0, 1.0)), 1.0,
                       TimeGrid(1.0, 64))
print(f"lambda_min = {lam.lambda_min:.12f}, linearity residual {lam.linearity_residual:.1e}")

# The free heat flow obeys phi^2 <= Psi pointwise.
l4 = l4_comparison(basis_field(dom, 1, mode_cap=64) + basis_field(dom, 3, 0.2, mode_cap=64), TimeGrid(1.0, 20))
print(f"L4 comparison: pointwise margin {l4.pointwise_margin:.2e}, norm margin {l4.norm_margin.min():.2e}")
