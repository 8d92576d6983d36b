"""Curvature of graph hypersurfaces with numerical verification tools."""

__version__ = "0.1.0"
