"""Catalyzed quantum adiabatic optimization: simulation, spectra and circuit compilation."""

__version__ = "0.1.0"
