"""thicktri: thick geodesic triangulations of hyperbolic patches."""

__version__ = "0.1.0"
