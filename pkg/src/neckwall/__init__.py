"""Geometrically constrained walls in thin 3D necks: regime classification,
explicit competitors, and discrete energy minimisation on dumbbell grids."""

__version__ = "0.1.0"
