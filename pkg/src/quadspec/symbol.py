"""
Complex quadratic symbols on the phase space R^{2n}.

A symbol is stored as a complex symmetric matrix ``Q`` acting on the phase
space coordinates ``X = (x_1, ..., x_n, xi_1, ..., xi_n)`` so that
``q(X) = X^T Q X``.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

import numpy as np
from scipy.linalg import expm

__all__ = [
    "QuadraticSymbol", "OperatorTerm", "HamiltonMap", "AngularSector",
    "SectorKind", "NonEllipticError", "NonSymplecticError",
    "symplectic_matrix", "symplectic_form", "symplectic_defect",
    "evaluate", "polar", "hamilton_map", "from_operator_terms",
    "to_operator_terms", "is_elliptic", "numerical_range",
    "sector_distance", "apply_symplectic", "random_symplectic",
    "EllipticityCertificate", "symbol_from_dict", "symbol_to_dict",
    "SymbolFormatError",
]


class NonEllipticError(ValueError):
    """Raised when an operation requires an elliptic symbol."""


class SymbolFormatError(ValueError):
    """A symbol file could not be interpreted."""


class NonSymplecticError(ValueError):
    def __init__(self, defect):
        super().__init__(f"matrix is not symplectic (defect {defect:.3e})")
        self.defect = defect


def symplectic_matrix(n):
    """
    Matrix of the symplectic form in (x, xi) coordinates.

    Returns ``[[0, -I], [I, 0]]`` so that ``X^T J Y = xi.y - x.eta``.
    """
    eye = np.eye(n)
    zero = np.zeros((n, n))
    return np.block([[zero, -eye], [eye, zero]])


def symplectic_form(X, Y):
    n = len(X) // 2
    return np.asarray(X) @ symplectic_matrix(n) @ np.asarray(Y)


def symplectic_defect(S):
    S = np.asarray(S)
    J = symplectic_matrix(S.shape[0] // 2)
    return float(np.linalg.norm(S.T @ J @ S - J))


@dataclass(frozen=True)
class QuadraticSymbol:
    """
    Complex quadratic form ``q(X) = X^T Q X`` on R^{2n}.

    Parameters
    ----------
    Q : array_like
        Complex symmetric matrix of shape ``(2n, 2n)``. Asymmetry up to
        ``1e-12 * ||Q||`` is removed by symmetrization; anything larger is an
        error.
    """

    Q: np.ndarray

    def __post_init__(self):
        Q = np.array(self.Q, dtype=complex)
        if Q.ndim != 2 or Q.shape[0] != Q.shape[1] or Q.shape[0] % 2:
            raise ValueError(f"Q must be square of even size, got {Q.shape}")
        if Q.shape[0] == 0:
            raise ValueError("Q must be non-empty")
        scale = np.linalg.norm(Q)
        if np.linalg.norm(Q - Q.T) > 1e-12 * max(scale, 1e-300):
            raise ValueError("Q is not symmetric")
        Q = (Q + Q.T) / 2
        Q.setflags(write=False)
        object.__setattr__(self, "Q", Q)

    @property
    def n(self):
        return self.Q.shape[0] // 2

    @property
    def real(self):
        return self.Q.real.copy()

    @property
    def imag(self):
        return self.Q.imag.copy()

    @property
    def norm(self):
        return float(np.linalg.norm(self.Q))

    def __call__(self, X):
        return evaluate(self, X)

    def conj(self):
        return QuadraticSymbol(self.Q.conj())

    def rotate(self, w):
        """Return the symbol ``w * q`` for a complex scalar ``w``."""
        return QuadraticSymbol(w * self.Q)

    def digest(self):
        """Stable SHA-256 of the coefficient matrix."""
        payload = json.dumps(
            [[[float(v.real), float(v.imag)] for v in row] for row in self.Q]
        )
        return hashlib.sha256(payload.encode()).hexdigest()

    @classmethod
    def from_monomials(cls, n, coeffs):
        """
        Build a symbol from monomial coefficients.

        ``coeffs`` maps index pairs ``(j, k)`` of phase-space coordinates
        (``0..n-1`` for x, ``n..2n-1`` for xi) to the coefficient of
        ``X_j X_k``. Each unordered pair may appear once.
        """
        Q = np.zeros((2 * n, 2 * n), dtype=complex)
        for (j, k), c in coeffs.items():
            if j == k:
                Q[j, j] += c
            else:
                Q[j, k] += c / 2
                Q[k, j] += c / 2
        return cls(Q)

    def __eq__(self, other):
        if not isinstance(other, QuadraticSymbol):
            return NotImplemented
        return self.Q.shape == other.Q.shape and bool(np.all(self.Q == other.Q))

    def __hash__(self):
        return hash(self.digest())


def evaluate(q, X):
    """Value ``q(X)`` at a real phase-space point (or a stack of points)."""
    X = np.asarray(X, dtype=float)
    if X.shape[-1] != 2 * q.n:
        raise ValueError(f"expected points of length {2 * q.n}, got {X.shape[-1]}")
    return np.einsum("...i,ij,...j->...", X, q.Q, X)


def polar(q, X, Y):
    """Polar (symmetric bilinear) form ``q(X; Y)``."""
    return np.asarray(X, dtype=float) @ q.Q @ np.asarray(Y, dtype=float)


@dataclass(frozen=True)
class HamiltonMap:
    """Hamilton map ``F`` with ``sigma(X, F Y) = q(X; Y)``."""

    F: np.ndarray

    def eigenvalues(self):
        return np.linalg.eigvals(self.F)


def hamilton_map(q):
    J = symplectic_matrix(q.n)
    # J^{-1} = -J
    return HamiltonMap(-J @ q.Q)


# ---------------------------------------------------------------------------
# Operator presentation and the Weyl table
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class OperatorTerm:
    """
    One term ``coeff * x^alpha * Op^beta`` of a differential operator.

    ``Op`` is either ``D = -i d/dx`` (convention ``"D"``) or ``d/dx``
    (convention ``"partial"``). Position factors stand to the left of the
    derivatives, as in ``x_1 d/dx_2``. Degree-0 terms are scalar constants.
    """

    alpha: tuple
    beta: tuple
    coeff: complex
    convention: str = "D"

    def __post_init__(self):
        object.__setattr__(self, "alpha", tuple(int(a) for a in self.alpha))
        object.__setattr__(self, "beta", tuple(int(b) for b in self.beta))
        object.__setattr__(self, "coeff", complex(self.coeff))
        if len(self.alpha) != len(self.beta):
            raise ValueError("alpha and beta must have the same length")
        if any(a < 0 for a in self.alpha + self.beta):
            raise ValueError("multi-indices must be nonnegative")
        if self.convention not in ("D", "partial"):
            raise ValueError(f"unknown derivative convention {self.convention!r}")
        if self.degree > 2:
            raise ValueError(f"term of degree {self.degree} is not quadratic")

    @property
    def degree(self):
        return sum(self.alpha) + sum(self.beta)

    def in_D(self):
        """Same term rewritten with ``D = -i d/dx``."""
        if self.convention == "D":
            return self
        # d/dx = i D
        return OperatorTerm(self.alpha, self.beta,
                            self.coeff * 1j ** sum(self.beta), "D")


def _expand(multi):
    out = []
    for j, p in enumerate(multi):
        out.extend([j] * p)
    return out


def from_operator_terms(terms, n=None):
    """
    Weyl symbol of a quadratic differential operator.

    Returns ``(symbol, residual)`` such that the operator equals the Weyl
    quantization of ``symbol`` plus ``residual`` times the identity.

    Raises
    ------
    ValueError
        On degree-1 terms, degree > 2 terms, or inconsistent dimensions.
    """
    terms = [t if isinstance(t, OperatorTerm) else OperatorTerm(**t) for t in terms]
    if n is None:
        if not terms:
            raise ValueError("cannot infer dimension from an empty term list")
        n = len(terms[0].alpha)
    Q = np.zeros((2 * n, 2 * n), dtype=complex)
    residual = 0j
    for term in terms:
        if len(term.alpha) != n:
            raise ValueError("all terms must share the same dimension")
        t = term.in_D()
        if t.degree == 1:
            raise ValueError("degree-1 terms are not allowed in a quadratic symbol")
        if t.degree == 0:
            residual += t.coeff
            continue
        xs = _expand(t.alpha)
        ds = _expand(t.beta)
        if len(xs) == 2:
            j, k = xs
        elif len(ds) == 2:
            j, k = n + ds[0], n + ds[1]
        else:
            j, k = xs[0], n + ds[0]
            if xs[0] == ds[0]:
                # x_j D_j = (x_j D_j + D_j x_j) / 2 + i/2
                residual += t.coeff * 0.5j
        if j == k:
            Q[j, j] += t.coeff
        else:
            Q[j, k] += t.coeff / 2
            Q[k, j] += t.coeff / 2
    return QuadraticSymbol(Q), residual


def to_operator_terms(q, residual=0j):
    """
    Canonical term list (``D`` convention) whose Weyl symbol is ``q``.

    Mixed monomials ``x_j xi_j`` are emitted as ``x_j D_j`` with the
    compensating constant folded into the degree-0 term, so that
    ``from_operator_terms(to_operator_terms(q, r)) == (q, r)``.
    """
    n = q.n
    terms = []
    const = complex(residual)
    for j in range(2 * n):
        for k in range(j, 2 * n):
            c = q.Q[j, k] if j == k else 2 * q.Q[j, k]
            if c == 0:
                continue
            alpha = [0] * n
            beta = [0] * n
            for idx in (j, k):
                if idx < n:
                    alpha[idx] += 1
                else:
                    beta[idx - n] += 1
            if j < n <= k and k - n == j:
                const -= c * 0.5j
            terms.append(OperatorTerm(alpha, beta, complex(c), "D"))
    if const != 0:
        terms.append(OperatorTerm([0] * n, [0] * n, const, "D"))
    return terms


# ---------------------------------------------------------------------------
# Numerical range
# ---------------------------------------------------------------------------

class SectorKind(str, Enum):
    FULL_PLANE = "FullPlane"
    HALF_LINE = "HalfLine"
    SECTOR = "Sector"


def _wrap(angle):
    """Principal value in (-pi, pi]."""
    a = (angle + np.pi) % (2 * np.pi) - np.pi
    return np.pi if a == -np.pi else a


@dataclass(frozen=True)
class AngularSector:
    """
    Closed angular sector ``{0} U {z : theta_min <= arg z <= theta_max}``.

    ``theta_min`` is a principal value; ``theta_max = theta_min + opening``
    and may exceed ``pi`` when the sector straddles the negative real axis.
    """

    kind: SectorKind
    theta_min: float = 0.0
    theta_max: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "kind", SectorKind(self.kind))
        if self.kind is SectorKind.FULL_PLANE:
            return
        if not -np.pi < self.theta_min <= np.pi:
            raise ValueError("theta_min must lie in (-pi, pi]")
        if self.theta_max < self.theta_min or self.theta_max - self.theta_min >= np.pi:
            raise ValueError("sector opening must lie in [0, pi)")
        if self.kind is SectorKind.HALF_LINE and self.theta_max != self.theta_min:
            raise ValueError("a half-line has zero opening")
        if self.kind is SectorKind.SECTOR and self.theta_max == self.theta_min:
            raise ValueError("a sector has positive opening")

    @property
    def opening(self):
        return self.theta_max - self.theta_min

    @property
    def directions(self):
        """Unit vectors spanning the two boundary half-lines."""
        return np.exp(1j * self.theta_min), np.exp(1j * self.theta_max)

    def relative_angle(self, z):
        """Angle of ``z`` measured from the first boundary ray, in (-pi, pi]."""
        return _wrap(np.angle(z) - self.theta_min)

    def contains(self, z, atol=1e-8):
        if self.kind is SectorKind.FULL_PLANE or z == 0:
            return True
        a = self.relative_angle(z)
        return -atol <= a <= self.opening + atol

    def to_dict(self):
        return {"kind": self.kind.value, "theta_min": float(self.theta_min),
                "theta_max": float(self.theta_max)}


@dataclass(frozen=True)
class EllipticityCertificate:
    """Why a symbol is (or is not) elliptic."""

    angle: float | None = None
    roots: tuple | None = None
    margin: float | None = None
    zero: tuple | None = None

    def to_dict(self):
        out = {}
        if self.angle is not None:
            out["angle"] = float(self.angle)
        if self.margin is not None:
            out["margin"] = float(self.margin)
        if self.roots is not None:
            out["roots"] = [[float(r.real), float(r.imag)] for r in self.roots]
        if self.zero is not None:
            out["zero"] = [float(v) for v in self.zero]
        return out


def _quadratic_roots_1d(q):
    """Roots of ``a l^2 + 2 b l + c`` where ``q = c x^2 + 2 b x xi + a xi^2``."""
    c, b, a = q.Q[0, 0], q.Q[0, 1], q.Q[1, 1]
    if abs(a) <= 1e-14 * q.norm:
        return None
    return tuple(np.roots([a, 2 * b, c]))


def is_elliptic(q):
    """
    Decide ellipticity.

    Returns ``(verdict, certificate)``. A positive-definite direction
    ``Re(e^{i theta} q) > 0`` certifies ellipticity; in dimension one a
    symbol without such a direction is elliptic iff both roots of its
    factorization ``a (xi - l1 x)(xi - l2 x)`` are non-real.
    """
    from .reduction import positive_definite_direction

    theta, margin = positive_definite_direction(q, return_margin=True, strict=False)
    if theta is not None:
        return True, EllipticityCertificate(angle=theta, margin=margin)
    if q.n > 1:
        return False, EllipticityCertificate(margin=margin)
    roots = _quadratic_roots_1d(q)
    if roots is None:
        # no xi^2 term: q vanishes on the xi axis
        return False, EllipticityCertificate(margin=margin, zero=(0.0, 1.0))
    real = [r for r in roots if abs(r.imag) <= 1e-12 * (1 + abs(r))]
    if real:
        # xi = l x with real l
        return False, EllipticityCertificate(roots=roots, margin=margin,
                                             zero=(1.0, float(real[0].real)))
    return True, EllipticityCertificate(roots=roots)


def numerical_range(q):
    """
    Closure of ``q(R^{2n})`` as an :class:`AngularSector`.

    Raises
    ------
    NonEllipticError
        If ``q`` is not elliptic.
    """
    from .reduction import positive_definite_direction, simultaneous_reduce

    elliptic, _ = is_elliptic(q)
    if not elliptic:
        raise NonEllipticError("numerical range is only classified for elliptic symbols")
    theta = positive_definite_direction(q)
    if theta is None:
        return AngularSector(SectorKind.FULL_PLANE, 0.0, 0.0)
    red = simultaneous_reduce(q, theta)
    a1, a2 = red.alphas[0], red.alphas[-1]
    lo = _wrap(np.arctan(a1) - theta)
    if a2 - a1 <= 1e-9 * (1 + abs(a1) + abs(a2)):
        return AngularSector(SectorKind.HALF_LINE, lo, lo)
    return AngularSector(SectorKind.SECTOR, lo, lo + (np.arctan(a2) - np.arctan(a1)))


def sector_distance(sector, z):
    """Euclidean distance from ``z`` to the closed sector."""
    z = complex(z)
    if sector.kind is SectorKind.FULL_PLANE or sector.contains(z, atol=0.0):
        return 0.0
    best = abs(z)
    for w in sector.directions:
        t = (z * np.conj(w)).real
        if t > 0:
            best = min(best, abs(z - t * w))
    return float(best)


# ---------------------------------------------------------------------------
# Linear symplectic changes of variables
# ---------------------------------------------------------------------------

def apply_symplectic(q, S, atol=1e-10):
    """Symbol ``q o S`` with matrix ``S^T Q S``."""
    S = np.asarray(S, dtype=float)
    if S.shape != q.Q.shape:
        raise ValueError("S has the wrong shape")
    defect = symplectic_defect(S)
    if defect > atol * max(1.0, np.linalg.norm(S) ** 2):
        raise NonSymplecticError(defect)
    return QuadraticSymbol(S.T @ q.Q @ S)


def random_symplectic(n, seed=None, scale=0.3):
    """
    Random real symplectic matrix ``exp(J H)`` with ``H`` symmetric Gaussian.

    ``scale`` multiplies the entries of ``H`` and controls the conditioning
    of the result.
    """
    rng = np.random.default_rng(seed)
    G = rng.standard_normal((2 * n, 2 * n))
    H = scale * (G + G.T) / 2
    return expm(symplectic_matrix(n) @ H)


# ---------------------------------------------------------------------------
# Symbol files
# ---------------------------------------------------------------------------

def _complex(v):
    if isinstance(v, (int, float)):
        return complex(v)
    if isinstance(v, (list, tuple)) and len(v) == 2:
        return complex(float(v[0]), float(v[1]))
    raise SymbolFormatError(f"expected [re, im], got {v!r}")


def symbol_from_dict(data):
    """
    Parse the JSON symbol format.

    Either ``{"n": n, "Q": [[[re, im], ...], ...]}`` (row-major ``2n x 2n``)
    or ``{"n": n, "terms": [{"alpha", "beta", "coeff": [re, im],
    "convention"}]}``. A term list must have residual at most
    ``1e-9 (1 + ||Q||)``.

    Raises
    ------
    SymbolFormatError
    """
    if not isinstance(data, dict) or "n" not in data:
        raise SymbolFormatError("symbol must be an object with key 'n'")
    try:
        n = int(data["n"])
    except (TypeError, ValueError) as exc:
        raise SymbolFormatError("'n' must be an integer") from exc
    if n < 1:
        raise SymbolFormatError("'n' must be positive")
    if ("Q" in data) == ("terms" in data):
        raise SymbolFormatError("give exactly one of 'Q' or 'terms'")
    try:
        if "Q" in data:
            rows = data["Q"]
            if len(rows) != 2 * n or any(len(r) != 2 * n for r in rows):
                raise SymbolFormatError(f"'Q' must be {2 * n}x{2 * n}")
            Q = np.array([[_complex(v) for v in r] for r in rows])
            if np.abs(Q - Q.T).max() > 1e-12 * max(np.abs(Q).max(), 1.0):
                raise SymbolFormatError("'Q' is not symmetric")
            return QuadraticSymbol(Q)
        terms = [OperatorTerm(t["alpha"], t["beta"], _complex(t["coeff"]),
                              t.get("convention", "D")) for t in data["terms"]]
        q, residual = from_operator_terms(terms, n)
    except SymbolFormatError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise SymbolFormatError(str(exc)) from exc
    if abs(residual) > 1e-9 * (1 + q.norm):
        raise SymbolFormatError(f"operator has a nonzero constant part {residual}")
    return q


def symbol_to_dict(q):
    """Matrix form of the JSON symbol format."""
    return {"n": q.n, "Q": [[[float(v.real), float(v.imag)] for v in row] for row in q.Q]}
