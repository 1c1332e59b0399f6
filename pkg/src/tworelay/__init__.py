"""Two-way relay network coding: TW-SDF and TW-1bSF simulation and bounds."""

__version__ = "0.1.0"
