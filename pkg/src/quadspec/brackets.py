"""
Poisson-bracket algebra of real quadratic forms, subelliptic order on the
boundary of the numerical range and sign changes of the imaginary part along
bicharacteristics of the real part.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.linalg import expm

from .reduction import positive_definite_direction, simultaneous_reduce
from .symbol import SectorKind, numerical_range, symplectic_matrix

__all__ = [
    "RealQuadraticForm", "poisson_bracket", "bracket_matrix", "is_normal",
    "iterated_brackets", "boundary_zero_set", "BoundaryZeroSet", "OrderReport",
    "order_at_halfline", "classify_point", "PointClass", "BicharWitness",
    "bichar_witness", "NoWitnessWithinHorizon", "PreconditionError",
]


class PreconditionError(ValueError):
    """The symbol or point does not satisfy an operation's precondition."""


class NoWitnessWithinHorizon(RuntimeError):
    """No sign change was found; retry with a longer horizon or more samples."""


@dataclass(frozen=True)
class RealQuadraticForm:
    """Real quadratic form ``X^T M X`` with ``M`` symmetric."""

    M: np.ndarray

    def __post_init__(self):
        M = np.array(self.M, dtype=float)
        if M.ndim != 2 or M.shape[0] != M.shape[1] or M.shape[0] % 2:
            raise ValueError(f"M must be square of even size, got {M.shape}")
        if np.linalg.norm(M - M.T) > 1e-12 * max(np.linalg.norm(M), 1e-300):
            raise ValueError("M is not symmetric")
        M = (M + M.T) / 2
        M.setflags(write=False)
        object.__setattr__(self, "M", M)

    @property
    def n(self):
        return self.M.shape[0] // 2

    @property
    def norm(self):
        return float(np.linalg.norm(self.M))

    def __call__(self, X):
        X = np.asarray(X, dtype=float)
        return np.einsum("...i,ij,...j->...", X, self.M, X)

    def gradient(self, X):
        return 2 * self.M @ np.asarray(X, dtype=float)

    def hamilton_generator(self):
        """Matrix ``G`` with ``d/dt Y = G Y`` for the Hamilton flow."""
        return -2 * symplectic_matrix(self.n) @ self.M

    def __add__(self, other):
        return RealQuadraticForm(self.M + other.M)

    def __sub__(self, other):
        return RealQuadraticForm(self.M - other.M)

    def __neg__(self):
        return RealQuadraticForm(-self.M)

    def __mul__(self, c):
        return RealQuadraticForm(float(c) * self.M)

    __rmul__ = __mul__


def bracket_matrix(A, B):
    """Matrix of ``{X^T A X, X^T B X}``."""
    n = A.shape[0] // 2
    C = 4 * A @ symplectic_matrix(n) @ B
    return (C + C.T) / 2


def poisson_bracket(a, b):
    """
    Poisson bracket ``{a, b} = d_xi a . d_x b - d_x a . d_xi b``.

    Both arguments are :class:`RealQuadraticForm` of the same dimension; the
    bracket of two quadratic forms is again a quadratic form.
    """
    if a.M.shape != b.M.shape:
        raise ValueError("forms must have the same dimension")
    return RealQuadraticForm(bracket_matrix(a.M, b.M))


def is_normal(q, rtol=1e-10):
    """True iff ``{Re q, Im q}`` vanishes identically (up to ``rtol ||Q||^2``)."""
    C = bracket_matrix(q.Q.real, q.Q.imag)
    return bool(np.linalg.norm(C) <= rtol * q.norm ** 2)


def iterated_brackets(q, max_length):
    """
    All iterated brackets ``p_I`` of ``(Re q, Im q)`` with ``|I| <= max_length``.

    Returns a dict keyed by index tuples ``I`` over ``{1, 2}``; ``p_I`` for
    ``I = (i1, ..., ik)`` is ``{p_i1, {p_i2, ..., {p_i(k-1), p_ik}}}``.
    Constants (the value ``z``) drop out of every bracket of length >= 2.
    """
    forms = {(1,): q.Q.real.copy(), (2,): q.Q.imag.copy()}
    for k in range(2, max_length + 1):
        for I in itertools.product((1, 2), repeat=k):
            forms[I] = bracket_matrix(forms[I[:1]], forms[I[1:]])
    return forms


# ---------------------------------------------------------------------------
# Boundary zero sets and orders
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BoundaryZeroSet:
    """Sample points of ``q^{-1}(z)`` for ``z`` on one boundary half-line."""

    z: complex
    points: np.ndarray
    multiplicity: int
    kernel_dims: tuple


def _null_basis(M, tol):
    """Orthonormal basis of the numerical kernel of ``M`` (absolute tolerance)."""
    if M.shape[1] == 0:
        return np.zeros((M.shape[1], 0))
    _, s, Vh = np.linalg.svd(M)
    s = np.concatenate([s, np.zeros(M.shape[1] - len(s))])
    return Vh.conj().T[:, s <= tol]


def _halfline_data(q, j):
    sector = numerical_range(q)
    if sector.kind is SectorKind.FULL_PLANE:
        raise PreconditionError("the numerical range is the whole plane")
    if j not in (1, 2):
        raise ValueError("half-line index must be 1 or 2")
    theta = positive_definite_direction(q)
    red = simultaneous_reduce(q, theta)
    return sector, red


def boundary_zero_set(q, j, seed=0):
    """
    Points of ``q^{-1}(z)`` for a unit-modulus ``z`` on half-line ``j``.

    Half-line 1 is ``e^{i theta_min} R_+``, half-line 2 is
    ``e^{i theta_max} R_+``. In reduced coordinates the zero set is the unit
    sphere of the extremal eigenspace (multiplicity ``m``). The sample holds
    the eigenspace basis, ``max(8, 2 m^2)`` random unit vectors of it, and
    bases of the nested subspaces on which the imaginary part stays
    extremal to increasing order along the flow of the real part; the
    highest pointwise orders are attained on the latter.
    """
    sector, red = _halfline_data(q, j)
    which = 0 if j == 1 else -1
    E = red.eigenspace(which)
    m = E.shape[1]
    rng = np.random.default_rng(seed)
    coeffs = [np.eye(m)]
    g = rng.standard_normal((max(8, 2 * m * m), m))
    coeffs.append(g / np.linalg.norm(g, axis=1, keepdims=True))

    R, Jm = _rot(q.Q, red.certificate_angle)
    alpha = red.alphas[which]
    B = Jm - alpha * R if j == 1 else alpha * R - Jm
    F = -symplectic_matrix(q.n) @ R
    W = E / np.linalg.norm(E, axis=0)
    W, _ = np.linalg.qr(W)
    dims = [m]
    Fk = np.eye(2 * q.n)
    scale = max(np.linalg.norm(B), 1e-300)
    for k in range(1, 4 * q.n + 1):
        Fk = Fk @ F
        scale *= max(np.linalg.norm(F), 1e-300)
        N = _null_basis(B @ Fk @ W, 1e-9 * scale)
        if N.shape[1] == 0:
            break
        W = W @ N
        dims.append(W.shape[1])
        # express in reduced coordinates: E^T R X
        coeffs.append((E.T @ R @ W).T)
    C = np.vstack(coeffs)
    C = C / np.linalg.norm(C, axis=1, keepdims=True)
    z = red.boundary_value(which)
    points = (C @ E.T) / np.sqrt(abs(z))
    return BoundaryZeroSet(z / abs(z), points, m, tuple(dims))


def _rot(Q, theta):
    c, s = np.cos(theta), np.sin(theta)
    return c * Q.real - s * Q.imag, s * Q.real + c * Q.imag


@dataclass(frozen=True)
class OrderReport:
    """
    Order of a symbol on one boundary half-line.

    ``order`` is the even integer ``k`` when finite, or ``None`` when the
    iterated brackets vanish beyond ``cap = 4n - 2`` (infinite order).
    """

    halfline_direction: complex
    order: int | None
    cap: int
    z: complex
    witness_points: np.ndarray
    per_point_orders: tuple

    @property
    def is_finite(self):
        return self.order is not None

    def to_dict(self):
        d = self.halfline_direction
        out = {"halfline_direction": [d.real, d.imag],
               "z": [self.z.real, self.z.imag], "cap": self.cap,
               "witness_points": self.witness_points.tolist(),
               "per_point_orders": list(self.per_point_orders)}
        if self.order is None:
            out["order"] = {"exceeds_cap": self.cap}
        else:
            out["order"] = {"finite": self.order}
        return out


def pointwise_order(forms, X, max_length, scale=None):
    """
    Largest ``j`` such that every ``p_I`` with ``|I| <= j`` vanishes at ``X``.

    Brackets of length one are taken as vanishing (``X`` lies on the zero
    set). Returns ``max_length`` when nothing up to that length fails.

    ``p_I(X)`` counts as zero when below ``1e-9 ||p_I|| |X|^2``. With
    ``scale`` (the norm of ``q``) an absolute floor ``1e-12 (4 scale)^(k-1)
    scale |X|^2`` is added for length ``k``, so that forms vanishing
    identically up to rounding (such as ``{p_1, p_1}``) are not mistaken
    for nonzero ones.
    """
    X = np.asarray(X, dtype=float)
    nx2 = X @ X
    for k in range(2, max_length + 1):
        floor = 0.0 if scale is None else 1e-12 * (4 * scale) ** (k - 1) * scale
        for I in itertools.product((1, 2), repeat=k):
            P = forms[I]
            if abs(X @ P @ X) > (1e-9 * np.linalg.norm(P) + floor) * nx2:
                return k - 1
    return max_length


def order_at_halfline(q, j, seed=0):
    """
    Order of ``q`` on boundary half-line ``j`` (1 or 2).

    Raises
    ------
    PreconditionError
        If ``q`` is normal or its numerical range is the whole plane.
    """
    if is_normal(q):
        raise PreconditionError("order is only defined for non-normal symbols")
    zs = boundary_zero_set(q, j, seed=seed)
    cap = 4 * q.n - 2
    forms = iterated_brackets(q, cap + 1)
    orders = tuple(pointwise_order(forms, X, cap + 1, scale=q.norm) for X in zs.points)
    k = max(orders)
    sector = numerical_range(q)
    direction = sector.directions[j - 1]
    return OrderReport(complex(direction), None if k > cap else k, cap,
                       complex(zs.z), zs.points, orders)


# ---------------------------------------------------------------------------
# Interior points and bicharacteristics
# ---------------------------------------------------------------------------

class PointClass(str, Enum):
    INTERIOR = "Interior"
    BOUNDARY = "Boundary"
    OUTSIDE = "Outside"


def classify_point(q, z, atol=1e-9):
    """``"Interior"``, ``"Boundary"`` or ``"Outside"`` relative to the numerical range."""
    sector = numerical_range(q)
    if sector.kind is SectorKind.FULL_PLANE:
        raise PreconditionError("the numerical range is the whole plane")
    if z == 0:
        return PointClass.BOUNDARY
    a = sector.relative_angle(z)
    if abs(a) <= atol or abs(a - sector.opening) <= atol:
        return PointClass.BOUNDARY
    if 0 < a < sector.opening:
        return PointClass.INTERIOR
    return PointClass.OUTSIDE


@dataclass(frozen=True)
class BicharWitness:
    """
    Sign change ``f(t_plus) > 0 > f(t_minus)`` of ``f(t) = Im q(Y(t)) - Im z``
    along ``Y(t) = exp(t G) X0``, the Hamilton flow of ``Re q``.
    """

    z: complex
    start_point: np.ndarray
    bracket_at_start: float
    t_plus: float
    t_minus: float
    f_plus: float
    f_minus: float
    t_cross: float
    flow_generator: np.ndarray
    case: int
    conservation_error: float

    def trajectory(self, ts):
        return np.array([expm(t * self.flow_generator) @ self.start_point for t in ts])

    def to_dict(self):
        return {"z": [self.z.real, self.z.imag],
                "start_point": self.start_point.tolist(),
                "bracket_at_start": self.bracket_at_start,
                "t_plus": self.t_plus, "t_minus": self.t_minus,
                "f_plus": self.f_plus, "f_minus": self.f_minus,
                "t_cross": self.t_cross, "case": self.case,
                "flow_generator": self.flow_generator.tolist(),
                "conservation_error": self.conservation_error}


def _level_set_samples(q, z, count, rng):
    """Random points of ``q^{-1}(z)`` for ``z`` interior to the sector."""
    theta = positive_definite_direction(q)
    red = simultaneous_reduce(q, theta)
    w = np.exp(1j * theta) * z
    r = w.real
    beta = w.imag / r
    a = red.alphas
    lower = a < beta
    pts = []
    while len(pts) < count:
        g = rng.standard_normal(len(a))
        aL = np.sum((beta - a[lower]) * g[lower] ** 2)
        aU = np.sum((a[~lower] - beta) * g[~lower] ** 2)
        if aL <= 0 or aU <= 0:
            continue
        c = np.where(lower, np.sqrt(aU) * g, np.sqrt(aL) * g)
        c /= np.linalg.norm(c)
        pts.append(np.sqrt(r) * red.P @ c)
    return np.array(pts)


def bichar_witness(q, z, horizon=200.0, samples=64, steps=10_000, seed=0):
    """
    Find a sign change of ``Im q - Im z`` from + to - along a
    bicharacteristic of ``Re q`` inside ``q^{-1}(z)``.

    Start points with a negative bracket ``{Re q, Im q}`` change sign
    immediately; otherwise the flow is followed forward up to ``horizon``.

    Raises
    ------
    PreconditionError
        If ``z`` is not interior or ``q`` is normal.
    NoWitnessWithinHorizon
        If no sign change was detected.
    """
    z = complex(z)
    if is_normal(q):
        raise PreconditionError("normal symbols have no interior sign changes")
    if classify_point(q, z) != PointClass.INTERIOR:
        raise PreconditionError("z must be interior to the numerical range")
    rng = np.random.default_rng(seed)
    re_q = RealQuadraticForm(q.Q.real)
    im_q = RealQuadraticForm(q.Q.imag)
    br = RealQuadraticForm(bracket_matrix(q.Q.real, q.Q.imag))
    G = re_q.hamilton_generator()
    pts = _level_set_samples(q, z, samples, rng)
    vals = br(pts) / np.sum(pts ** 2, axis=1)
    tol = 1e-10 * abs(z)

    def f(t, X0):
        return im_q(expm(t * G) @ X0) - z.imag

    def conservation(X0, t_end):
        ts = np.linspace(min(0.0, t_end), max(0.0, t_end), 33)
        return float(max(abs(re_q(expm(t * G) @ X0) - z.real) for t in ts) / abs(z))

    order = np.argsort(vals)
    if vals[order[0]] < 0:
        X0 = pts[order[0]]
        delta = 1e-2 / max(np.linalg.norm(G), 1e-300)
        for _ in range(60):
            fp, fm = f(-delta, X0), f(delta, X0)
            if fp > tol and fm < -tol:
                return BicharWitness(z, X0, float(br(X0)), -delta, delta, float(fp),
                                     float(fm), 0.0, G, 1, conservation(X0, delta))
            delta = delta * 2 if max(abs(fp), abs(fm)) <= tol else delta / 2
        raise NoWitnessWithinHorizon("local sign change could not be resolved")

    dt = horizon / steps
    step = expm(dt * G)
    for X0 in pts[order[::-1]]:
        Y = X0.copy()
        prev = 0.0
        for k in range(1, steps + 1):
            Y = step @ Y
            cur = im_q(Y) - z.imag
            if prev > tol and cur < -tol:
                a, b = (k - 1) * dt, k * dt
                fa, fb = f(a, X0), f(b, X0)
                if not (fa > 0 > fb):
                    prev = cur
                    continue
                lo, hi = a, b
                while hi - lo > 1e-10:
                    mid = (lo + hi) / 2
                    if f(mid, X0) > 0:
                        lo = mid
                    else:
                        hi = mid
                return BicharWitness(z, X0, float(br(X0)), a, b, float(fa), float(fb),
                                     (lo + hi) / 2, G, 2, conservation(X0, b))
            prev = cur
    raise NoWitnessWithinHorizon(f"no sign change up to t = {horizon}")
