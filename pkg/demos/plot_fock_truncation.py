"""
Hermite-basis matrices and how far to trust them
================================================

The Weyl quantization of a quadratic symbol is a banded matrix in the
Hermite basis. Its truncations have eigenvalues that look like the
operator's at low energy and drift away at high energy, and even a normal
operator converges slowly when the basis is not adapted to it. This script
quantifies both effects.
"""

import numpy as np
from scipy.linalg import eigvals

from quadspec.fixtures import q1, rotated_oscillator
from quadspec.fock import assemble_weyl_matrix, truncation_check
from quadspec.spectrum import spectrum_lattice

# %%
# Rotated oscillator: distance from the exact eigenvalue
# ``e^{i pi/8}(2k+1)`` to the nearest eigenvalue of a truncation. Low
# energies are fine to rounding error, high energies are not.

q = rotated_oscillator(np.pi / 4)
ks = np.array([0, 5, 10, 15, 20, 25, 30])
exact = np.exp(1j * np.pi / 8) * (2 * ks + 1)
for N in (50, 100):
    ev = eigvals(assemble_weyl_matrix(q, N).dense())
    err = [np.min(np.abs(ev - e)) for e in exact]
    print(f"N = {N:3d}: errors at k = {ks.tolist()}:", " ".join(f"{e:.0e}" for e in err))

# %%
# For q1 the compression is not normal in the Hermite basis, so the
# lowest eigenvalues converge only as the cutoff grows.

lat = spectrum_lattice(q1(), 6).eigenvalues
for N in (10, 20, 40):
    ev = eigvals(assemble_weyl_matrix(q1(), N).dense())
    err = max(np.min(np.abs(ev - e)) for e in lat)
    print(f"q1, N = {N:2d} per mode: worst error on |lambda| <= 6 is {err:.1e}")

# %%
# Doubling test for smallest singular values, the criterion the grid and
# profile routines use before trusting a value.

for z in (3 + 1j, 15 + 6j, 25 + 10j):
    ok, a, b = truncation_check(q, z, 64)
    print(f"z = {z}: sigma_min at N=64 {a:.3e}, at N=128 {b:.3e}, converged {ok}")
