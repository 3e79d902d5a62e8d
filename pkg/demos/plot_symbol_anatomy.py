"""
Anatomy of an elliptic quadratic symbol
=======================================

A quadratic symbol is a complex symmetric matrix ``Q`` acting on
``X = (x, xi)``. Most of what matters about the operator ``q^w`` can be
read off ``Q`` without building any matrix of the operator: whether it is
elliptic, the sector its values fill, its eigenvalues, and how badly it
fails to be normal.
"""

import numpy as np

from quadspec.brackets import is_normal, order_at_halfline
from quadspec.fixtures import q1, q2, q3, rotated_oscillator
from quadspec.spectrum import spectrum_lattice
from quadspec.symbol import from_operator_terms, is_elliptic, numerical_range

# %%
# Symbols can be written directly as matrices or as sums of operator
# monomials. The monomial route keeps track of the constant that Weyl
# symmetrization produces (``x D`` is ``x xi`` plus ``i/2``).

q = q2()
print("q2 matrix:\n", np.round(q.Q, 3))

# %%
# Ellipticity comes with a certificate: an angle ``theta`` with
# ``Re(e^{i theta} q)`` positive definite, and the smallest eigenvalue of
# that real part as a margin.

ok, cert = is_elliptic(q)
print("elliptic:", ok, cert.to_dict())

# %%
# The numerical range is a closed sector. Its opening is what separates
# the operators that behave like the harmonic oscillator from the ones
# whose resolvent explodes far from the spectrum.

for name, sym in [("rotated", rotated_oscillator()), ("q1", q1()), ("q2", q2()), ("q3", q3())]:
    s = numerical_range(sym)
    print(f"{name:8s} sector [{np.degrees(s.theta_min):6.2f}, {np.degrees(s.theta_max):6.2f}] deg"
          f"   normal={is_normal(sym)}")

# %%
# Eigenvalues form a lattice generated by the eigenvalues of the
# Hamilton map that point into the sector.

lat = spectrum_lattice(q1(), 8)
print("q1 generators:", [(complex(np.round(m, 4)), r) for m, r in lat.generators])
print("q1 eigenvalues of modulus <= 8:", np.round(lat.eigenvalues, 3))

# %%
# Non-normal symbols are graded by the order of vanishing of iterated
# Poisson brackets on each boundary half-line. For q2 the bracket of
# real and imaginary parts already detects the imaginary axis, while on
# the real axis brackets of length up to five all vanish.

for j in (1, 2):
    r = order_at_halfline(q2(), j)
    print(f"q2 half-line {j}: direction {np.round(r.halfline_direction, 3)}, order {r.order}")

r = order_at_halfline(q3(), 1)
print("q3 on R+: finite order?", r.is_finite, "(cap", r.cap, ")")

# %%
# The same symbol from a list of operator terms (powers of x, powers of
# D, coefficient), here ``D^2 + e^{i pi/4} x^2``. The residual constant is
# zero because neither term mixes x and D.

from quadspec.symbol import OperatorTerm

terms = [OperatorTerm((0,), (2,), 1.0), OperatorTerm((2,), (0,), np.exp(1j * np.pi / 4))]
sym, residual = from_operator_terms(terms)
print("from terms matches rotated oscillator:",
      np.allclose(sym.Q, rotated_oscillator().Q), "residual", residual)
