"""Numerical laboratory for Dirichlet problems with boundary-singular lower-order terms."""
__version__ = "0.1.0"
