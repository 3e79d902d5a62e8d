"""
Inside, on the edge of, and outside the numerical range
========================================================

Along a half-line ``eta z0`` the resolvent norm of an elliptic quadratic
operator behaves in one of three ways. Outside the sector it decays like
``1/eta``. On a boundary half-line with finite bracket order it stays
bounded. In the interior it grows faster than any power of ``eta``.
After rescaling, the boundary behaviour becomes a semiclassical index:
``||(q^w_h - z)^{-1}||`` grows like ``h^{-k/(k+1)}`` with ``k`` the
order, so ``2/3`` for the rotated oscillator.
"""

import numpy as np

from quadspec.fixtures import harmonic_oscillator, rotated_oscillator
from quadspec.resolvent import fit_sc_index, halfline_profile

q = rotated_oscillator(np.pi / 4)

# %%
# Interior direction ``e^{i pi/6}``: growth. The ratio between successive
# norms keeps increasing, which is the signature of super-polynomial
# growth. Desk-scale cutoffs only reach the beginning of it.

p = halfline_profile(q, np.exp(1j * np.pi / 6), [4, 8, 16, 32])
print("interior:", p.verdict, np.round(p.norms, 3), "cutoffs", p.cutoffs)

# %%
# Boundary direction ``R+``: bounded.

p = halfline_profile(q, 1.0, np.geomspace(5, 60, 12))
print("boundary:", p.verdict, f"max/min = {max(p.norms) / min(p.norms):.2f}")

# %%
# Outside, for the self-adjoint oscillator: ``||R|| <= 1/d(z, sector)``.

p = halfline_profile(harmonic_oscillator(), np.exp(1j * np.pi / 4), [2, 4, 8, 16])
print("outside:", p.verdict, np.round(p.norms * np.array(p.etas) * np.sin(np.pi / 4), 4))

# %%
# Semiclassical index at ``z = 1``. The fit regresses
# ``log ||R_h||`` on ``log(1/h)``.

fit = fit_sc_index(q, 1.0, [1 / k for k in range(5, 55, 5)])
print(f"index at z = 1: {fit.mu_hat:.3f} (2/3 = {2 / 3:.3f}), residual {fit.residual:.2e}")

fit = fit_sc_index(q, 2 * np.exp(1j * np.pi / 6), [1 / 8, 1 / 16, 1 / 32, 1 / 64])
print(f"apparent index at an interior point: {fit.mu_hat:.2f}")
