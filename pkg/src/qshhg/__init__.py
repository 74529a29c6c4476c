"""Quantum sideband high-harmonic generation toolkit."""
