"""
Capacity density along a boundary
=================================

The ratio cap(closed ball minus domain, double ball) / cap(closed ball,
double ball) at boundary points.  A positive lower bound over points and
radii is what the exterior condition asks for.
"""
from holderlab.capacity import ball_capacity, cdc_ratio, cdc_sweep
from holderlab.geometry import build_grid
from holderlab.references import condenser_capacity

# The reference condenser first: a disk inside its double.
for h in (1 / 16, 1 / 32, 1 / 64):
    print(f"h={h:.4f}  cap={ball_capacity(1.0, h):.4f}  exact={condenser_capacity(1.0, 2.0):.4f}")

# Flat edge, reentrant corner, and the slit tip.
square = build_grid("unit_square", 128)
lshape = build_grid("l_shape", 128)
slit = build_grid("slit_square", 128)
print("square edge   ", [round(cdc_ratio(square, (0.5, 0.0), R), 3) for R in (0.05, 0.1, 0.2)])
print("square corner ", [round(cdc_ratio(square, (0.0, 0.0), R), 3) for R in (0.05, 0.1, 0.2)])
print("l_shape corner", [round(cdc_ratio(lshape, (0.0, 0.0), R), 3) for R in (0.05, 0.1, 0.2)])
print("slit tip      ", [round(cdc_ratio(slit, (0.0, 0.0), R), 3) for R in (0.05, 0.1, 0.2)])

# A sweep over 16 boundary points reports the smallest ratio seen.
for name, g in (("unit_square", square), ("l_shape", lshape), ("slit_square", slit)):
    _, gamma = cdc_sweep(g, 16, [0.05, 0.1, 0.2])
    print(f"{name:12s} gamma_hat = {gamma:.3f} on R in [0.05, 0.2]")
