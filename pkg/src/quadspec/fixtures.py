"""
Reference operators used throughout the tests and demos.

``q1`` is normal; ``q2`` and ``q3`` are non-normal. All three are given by
their operator coefficients (with ``d/dx`` derivatives) and converted to
Weyl symbols through the quadratic Weyl table.
"""

import numpy as np

from .symbol import OperatorTerm, QuadraticSymbol, from_operator_terms

__all__ = ["harmonic_oscillator", "rotated_oscillator", "q1_terms", "q2_terms",
           "q3_terms", "q1", "q2", "q3", "FIXTURES", "random_elliptic"]


def _t(alpha, beta, coeff):
    return OperatorTerm(alpha, beta, coeff, "partial")


def q1_terms():
    return [
        _t((0, 0), (2, 0), -(1 + 1j)), _t((0, 0), (0, 2), -1),
        _t((1, 0), (1, 0), 4 * (-1 + 1j)), _t((0, 1), (1, 0), 2 * (-1 + 1j)),
        _t((0, 1), (0, 1), 6j), _t((1, 0), (0, 1), 2j),
        _t((2, 0), (0, 0), 6 + 5j), _t((0, 2), (0, 0), 11 + 1j),
        _t((1, 1), (0, 0), 10 + 4j), _t((0, 0), (0, 0), -2 + 5j),
    ]


def q2_terms():
    return [
        _t((0, 0), (2, 0), -1), _t((0, 0), (0, 2), -2), _t((0, 1), (0, 1), 4j),
        _t((2, 0), (0, 0), 2), _t((0, 2), (0, 0), 4 + 1j), _t((1, 1), (0, 0), 4),
        _t((0, 0), (0, 0), 2j),
    ]


def q3_terms():
    return [
        _t((0, 0), (2, 0), -(1 + 1j)), _t((0, 0), (0, 2), -2),
        _t((1, 0), (1, 0), 4 * (-1 + 1j)), _t((0, 1), (1, 0), 2 * (1 - 1j)),
        _t((1, 0), (0, 1), -4j), _t((2, 0), (0, 0), 9 + 4j),
        _t((0, 2), (0, 0), 2 + 1j), _t((1, 1), (0, 0), -4 * (1 + 1j)),
        _t((0, 0), (0, 0), -2 + 2j),
    ]


def harmonic_oscillator(n=1, weights=None):
    """``sum_j w_j (x_j^2 + xi_j^2)``."""
    w = np.ones(n) if weights is None else np.asarray(weights, dtype=float)
    return QuadraticSymbol(np.diag(np.concatenate([w, w]).astype(complex)))


def rotated_oscillator(theta=np.pi / 4):
    """``xi^2 + e^{i theta} x^2``."""
    return QuadraticSymbol(np.diag([np.exp(1j * theta), 1.0]))


def q1():
    return from_operator_terms(q1_terms())[0]


def q2():
    return from_operator_terms(q2_terms())[0]


def q3():
    return from_operator_terms(q3_terms())[0]


FIXTURES = {
    "harmonic": harmonic_oscillator,
    "rotated": rotated_oscillator,
    "q1": q1,
    "q2": q2,
    "q3": q3,
}


def random_elliptic(n, rng, full_plane=False):
    """
    Random elliptic symbol.

    By default ``e^{-i phi} (P + i K)`` with ``P`` positive definite, which is
    elliptic with a proper sector as numerical range (generically
    non-normal). With ``full_plane`` (``n = 1`` only) returns
    ``a (xi - l1 x)(xi - l2 x)`` with both roots in the same open
    half-plane, whose numerical range is the whole plane.
    """
    if full_plane:
        if n != 1:
            raise ValueError("full-plane elliptic symbols exist only for n = 1")
        sign = rng.choice([-1.0, 1.0])
        l1, l2 = (complex(rng.normal(), sign * rng.uniform(0.3, 2.0)) for _ in range(2))
        a = complex(rng.normal(), rng.normal())
        return QuadraticSymbol(a * np.array([[l1 * l2, -(l1 + l2) / 2],
                                             [-(l1 + l2) / 2, 1.0]]))
    G = rng.standard_normal((2 * n, 2 * n))
    P = G @ G.T + 0.5 * np.eye(2 * n)
    K = rng.standard_normal((2 * n, 2 * n))
    K = K + K.T
    phi = rng.uniform(-np.pi, np.pi)
    return QuadraticSymbol(np.exp(-1j * phi) * (P + 1j * K))
