"""
Hölder continuity of solutions with singular coefficients
=========================================================

Drift |b| ~ d^(-1/2) and potential mu ~ d^(-3/2) blow up at the boundary,
the trace has a square-root cusp, and the data is Lebesgue measure.  The
solution stays bounded and the fitted exponent and estimate ratio are
stable under refinement.  The fitted exponent describes this solution
only; it says nothing about constants in general bounds.
"""
from holderlab.analysis import holder_fit, holder_norm
from holderlab.geometry import build_grid, singular_coefficients
from holderlab.measure import DiscreteMeasure
from holderlab.perturbation import solve_bvp
from holderlab.references import cusp_trace

for res in (64, 128, 256):
    g = build_grid("unit_square", res)
    c = singular_coefficients(g, 0.5, b_scale=0.25, c_scale=0.25)
    u, rep = solve_bvp(c, DiscreteMeasure.lebesgue(g), cusp_trace, fit=False)
    fit = holder_fit(u, (4 / 128, g.diam / 4))
    ratio = holder_norm(u, min(fit.beta_hat, 1.0)) / (rep.data_norm + rep.trace_norm)
    print(f"res {res:4d}: sup|u| {u.sup_norm():.4f}  beta_hat {fit.beta_hat:.3f}  "
          f"norm ratio {ratio:.3f}  residual {rep.residual:.1e}")
