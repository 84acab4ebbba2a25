"""Finite-dimensional operator-algebra geometry: dilations of completely positive
maps, conditional expectations, homogeneous bundles with reproducing
(-*)-kernels, and the polar decomposition of ``G_A/G_B``.
"""

from .errors import OpalgError

__version__ = "0.1.0"

__all__ = ["OpalgError", "__version__"]
