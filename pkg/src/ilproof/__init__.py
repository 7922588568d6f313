"""Proof engineering toolkit for interpretability logic.

See README.md for the calculi, the decision procedure and the uniform
interpolation pipeline this package provides.
"""

__version__ = "0.1.0"
