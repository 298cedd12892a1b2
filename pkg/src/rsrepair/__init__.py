"""Centralized repair of multiple failures in Reed-Solomon codes."""

from rsrepair.kernels import BACKEND

__version__ = "0.1.0"

__all__ = ["BACKEND", "__version__"]
