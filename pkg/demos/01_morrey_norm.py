"""
Morrey norms of measures
========================

Lebesgue measure, a point mass and a measure concentrating on a line,
compared across exponents.
"""
import numpy as np

from holderlab.geometry import build_grid
from holderlab.measure import DiscreteMeasure, morrey_norm

grid = build_grid("unit_square", 128)

# Lebesgue measure: mass pi r^2 in a ball, so the q = 4/3 weight r^(-1/2)
# leaves pi r^(3/2), largest for the biggest admissible ball.
leb = DiscreteMeasure.lebesgue(grid)
res = morrey_norm(leb, 4 / 3)
print(f"Lebesgue, q=4/3: {res.value:.5f} at {res.argmax_center}, r={res.argmax_radius:.4f}")
print(f"closed form:     {2 ** 0.25 * np.pi / 8:.5f}")

# A point mass has no decay in r, so the norm is driven by the smallest
# radius the scan reaches and grows with depth for q > 1.
dirac = DiscreteMeasure.point_mass(grid, (0.5, 0.5))
for depth in (2, 4, 6):
    print(f"point mass, depth {depth}: {morrey_norm(dirac, 4 / 3, depth).value:.4f}")

# Mass spread along the line y = 1/2: ball masses scale like r above the
# grid spacing.  Below h each cell acts like an atom, which is what drives
# the large q = 2 value at the default scan depth.
line = DiscreteMeasure.from_density(grid, lambda x, y: (np.abs(y - 0.5) < grid.h / 2) / grid.h)
for q in (1.0, 4 / 3, 2.0):
    print(f"line measure, q={q:.3f}: {morrey_norm(line, q).value:.4f}")
