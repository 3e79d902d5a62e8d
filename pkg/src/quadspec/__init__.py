"""Spectra and pseudospectra of elliptic quadratic differential operators."""
