"""Topological recursion free energies, spectral networks and BPS spectra
for hypergeometric-type spectral curves."""

__version__ = "0.1.0"
