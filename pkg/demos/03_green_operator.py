"""
The zero-boundary solution operator
===================================

On the disk the five-point stencil with shortened boundary arms solves
-Lap u = 1 exactly, and converges at second order for a quartic solution.
"""
import numpy as np

from holderlab.elliptic import assemble, green_apply
from holderlab.geometry import build_grid
from holderlab.measure import DiscreteMeasure
from holderlab.references import disk_poisson, disk_quartic

prev = None
for res in (32, 64, 128, 256):
    g = build_grid("unit_disk", res)
    op = assemble(g)
    u1 = green_apply(op, DiscreteMeasure.lebesgue(g))
    e1 = np.max(np.abs(u1.values - disk_poisson(*g.points.T)))
    u4 = green_apply(op, DiscreteMeasure.from_density(g, lambda x, y: 16 * (x * x + y * y)))
    e4 = np.max(np.abs(u4.values - disk_quartic(*g.points.T)))
    order = "" if prev is None else f"  order {np.log2(prev / e4):.2f}"
    print(f"res {res:4d}: quadratic err {e1:.1e}  quartic err {e4:.2e}{order}")
    prev = e4

# A point mass: the solution is positive and peaks at the mass.
g = build_grid("unit_disk", 128)
u = green_apply(assemble(g), DiscreteMeasure.point_mass(g, (0.3, 0.2)))
print("min", u.values.min(), "argmax", g.points[np.argmax(u.values)])
