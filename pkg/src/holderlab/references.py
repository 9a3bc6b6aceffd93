"""Closed-form values and analytic solutions used as independent references."""
import numpy as np

# Morrey norm (q = 4/3) of Lebesgue measure on the unit square: the maximand
# pi r^(3/2) peaks at r = 1/4 and diam^(1/2) = 2^(1/4).
MORREY_SQUARE = 2 ** 0.25 * np.pi / 8
# cap(closed B(0, R), B(0, 2R)) in the plane
CAP_ANNULUS = 2 * np.pi / np.log(2)


def imsqrt(x, y):
    """``Im sqrt(z)`` with the argument taken in ``(0, 2 pi)``; vanishes on the slit."""
    theta = np.mod(np.arctan2(y, x), 2 * np.pi)
    return np.sqrt(np.hypot(x, y)) * np.sin(theta / 2)


def cusp_trace(x, y):
    """Boundary data with a square-root cusp at ``(1/2, 0)``."""
    return np.sqrt(np.hypot(x - 0.5, y))


def disk_poisson(x, y):
    """Solution of ``-Lap u = 1`` on the unit disk with zero boundary values."""
    return (1 - x * x - y * y) / 4


def disk_quartic(x, y):
    """Solution of ``-Lap u = 16 r^2`` on the unit disk with zero boundary values."""
    return 1 - (x * x + y * y) ** 2


def condenser_capacity(inner: float, outer: float) -> float:
    """Planar capacity of the closed disk of radius ``inner`` in the open disk ``outer``."""
    return 2 * np.pi / np.log(outer / inner)
