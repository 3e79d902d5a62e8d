"""
One-dimensional normal forms and sign-changing bicharacteristics
================================================================

Every elliptic quadratic symbol in one dimension is, after a linear
symplectic change of variables, one of three models:

* ``alpha (xi^2 + e^{i theta} x^2)``, the rotated oscillator, when the
  numerical range is a proper sector;
* ``alpha (xi + i x)(xi + eta x)`` or ``alpha (xi - i x)(xi + eta x)``
  when it is the whole plane. These operators are Fredholm of index
  ``-2`` and ``+2`` and have no spectrum at all in the usual sense.

The second half of the script exhibits why interior points are so
unstable: along a bicharacteristic of ``Re q`` in the level set
``q = z``, ``Im q - Im z`` changes sign from ``+`` to ``-``.
"""

import numpy as np

from quadspec.brackets import bichar_witness
from quadspec.fixtures import q2, random_elliptic, rotated_oscillator
from quadspec.reduction import reduce_1d
from quadspec.spectrum import spectrum_lattice
from quadspec.symbol import QuadraticSymbol, apply_symplectic, random_symplectic

rng = np.random.default_rng(0)

# %%
# A disguised rotated oscillator: reduce it and compare the predicted
# eigenvalues ``alpha e^{i theta/2}(2k+1)`` with the lattice.

q = apply_symplectic(QuadraticSymbol(2 * np.diag([np.exp(0.9j), 1.0])), random_symplectic(1, seed=4))
nf = reduce_1d(q)
print(nf.kind, "alpha", np.round(nf.alpha, 6), "theta", round(nf.theta, 6))
pred = nf.alpha * np.exp(1j * nf.theta / 2) * (2 * np.arange(4) + 1)
print("predicted", np.round(pred, 6))
print("lattice  ", np.round(spectrum_lattice(q, abs(pred[-1]) + 0.1).eigenvalues, 6))

# %%
# Symbols whose numerical range is the whole plane.

for _ in range(6):
    nf = reduce_1d(random_elliptic(1, rng, full_plane=True))
    print(nf.kind, "eta", np.round(nf.eta, 4), "index", nf.fredholm_index)

# %%
# Witnesses of the sign change for two interior points.

for sym, z in [(rotated_oscillator(), 2 * np.exp(1j * np.pi / 6)), (q2(), 1 + 1j)]:
    w = bichar_witness(sym, z)
    t = np.linspace(min(0.0, w.t_plus), max(0.0, w.t_minus), 5)
    Y = w.trajectory(t)
    values = np.array([sym(y) for y in Y])
    print(f"z = {z:.3f}: case {w.case}, f(t+) = {w.f_plus:.3g}, f(t-) = {w.f_minus:.3g}")
    print("   Re q along the flow:", np.round(values.real, 10))
