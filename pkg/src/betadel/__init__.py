"""Simulation and analytics for beta- and beta'-Voronoi/Delaunay tessellations."""

from .constants import Family, ModelParams, ModelConstants, ParameterError

__all__ = ["Family", "ModelParams", "ModelConstants", "ParameterError"]
__version__ = "0.1.0"
