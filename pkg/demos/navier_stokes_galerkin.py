"""
Fourier-Galerkin Navier-Stokes on a periodic box
================================================

Velocities are divergence-free trigonometric polynomials with ``|k_i| <= K``.
The trilinear form is computed exactly by quadrature, the Stokes part is
integrated exactly, and the nonlinearity with classical RK4.  The last part
compares the full solution with solutions started from truncated data.
"""
import numpy as np

from pclab import TimeGrid
from pclab.ns import (
    PeriodicBox,
    galerkin_truncate,
    ladyzhenskaya_ratio,
    ns_evolve,
    random_field,
    taylor_green,
    taylor_green_exact,
    trilinear_b,
    uniqueness_experiment,
)

box = PeriodicBox(3, 4)
u, v, w = (random_field(box, s) for s in range(3))
print(f"b(u,v,v) = {trilinear_b(u, v, v):.1e}")
print(f"b(u,v,w) + b(u,w,v) = {trilinear_b(u, v, w) + trilinear_b(u, w, v):.1e}")

# Unforced energy decay and the balance |y(t)|^2 + 2 nu int |grad y|^2 = |y0|^2.
y0 = random_field(box, 11, energy=1.0)
traj = ns_evolve(y0, None, 0.5, TimeGrid(1.0, 200))
print(f"energy {traj.l2_norms()[-1] ** 2:.6f} at T = 1, balance residual {traj.energy_residual():.1e}")

# Taylor-Green is an exact decaying solution in 2-D.
box2 = PeriodicBox(2, 4)
tg = ns_evolve(taylor_green(box2), None, 0.1, TimeGrid(1.0, 50))
print("Taylor-Green coefficient error:", np.abs(tg.coeffs - taylor_green_exact(box2, 0.1, tg.times)).max())

# Truncating y0 to |k| <= n and evolving gives distances that shrink with n.
res = uniqueness_experiment(random_field(box, 1, energy=1.0), None, 0.5, [1, 2, 3, 4], TimeGrid(1.0, 50))
for n, d, c in zip(res.n_list, res.D, res.C):
    print(f"n={n}: D_n = {d:.4f}, fitted C_n = {c:.3f}")

print("Ladyzhenskaya ratio of the truncated field:", ladyzhenskaya_ratio(galerkin_truncate(y0, 3)))
