"""
A square-root singularity at a slit tip
=======================================

The harmonic function Im sqrt(z) vanishes on both faces of the slit and
has exponent 1/2 at the tip.  The fitted exponent of the discrete harmonic
extension should land near 0.5 on every resolution.
"""
import numpy as np

from holderlab.analysis import holder_fit
from holderlab.elliptic import assemble, harmonic_extension
from holderlab.geometry import build_grid
from holderlab.references import imsqrt

for res in (64, 128, 256):
    g = build_grid("slit_square", res)
    w = harmonic_extension(assemble(g), imsqrt)
    fit = holder_fit(w)
    err = np.max(np.abs(w.values - imsqrt(*g.points.T)))
    print(f"res {res:4d}: beta_hat {fit.beta_hat:.3f} (r2 {fit.fit_r2:.4f}), sup error {err:.3e}")

# The modulus itself, on the finest grid.
for r, om in zip(fit.radii, fit.omega):
    print(f"  r={r:.4f}  omega={om:.4f}  omega/sqrt(r)={om / np.sqrt(r):.3f}")
