"""
Heat flow in a sine basis
=========================

Fields on a box with zero boundary values live in a sine basis, where the
Laplacian is diagonal.  The heat propagator is then exact, and a forced
problem can be stepped either with an exponential integrator or with
Crank-Nicolson.
"""
import numpy as np

from pclab import BoxDomain, SourceSpec, SpectralField, TimeGrid, basis_field, heat_evolve, norm, parabolic_evolve
from pclab.spectral import analyze, synthesize

dom = BoxDomain(1, np.pi, 255)

# A single mode decays like exp(-k^2 t), with no discretisation error at all.
y0 = basis_field(dom, 3, mode_cap=16)
for t in (0.1, 0.5, 1.0):
    c = heat_evolve(y0, t).coeffs[2]
    print(f"k=3, t={t}: coefficient {c:.15f}, exact {np.exp(-9 * t):.15f}")

# Nodal data is analysed with a sine transform.  A hat function keeps many modes.
x = dom.mesh()[0]
hat = np.minimum(x, np.pi - x)
field = SpectralField(dom, analyze(hat, dom, (64,)))
print("hat reconstruction error:", np.abs(synthesize(field.coeffs, dom) - hat).max())

# Forced problem y_t - y_xx = 1, y(0) = sin x.  The exponential integrator is
# exact for a source that is constant in time, so it serves as the reference.
y0 = basis_field(dom, 1, mode_cap=63)
u = SourceSpec.constant(1.0)
ref = parabolic_evolve(y0, u, TimeGrid(1.0, 4), "duhamel").final
errs = []
for n in (64, 128, 256):
    cn = parabolic_evolve(y0, u, TimeGrid(1.0, n), "crank_nicolson").final
    errs.append(norm(cn - ref))
    print(f"Crank-Nicolson with {n:3d} steps: L2 error {errs[-1]:.3e}")
print("observed orders:", np.log2(np.array(errs[:-1]) / np.array(errs[1:])))
