"""
Reductions of quadratic forms: positive-definite directions, simultaneous
diagonalization, Williamson normal form and the one-dimensional normal forms.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import LinAlgError, cholesky, eigh
from scipy.optimize import minimize_scalar

from .symbol import (NonEllipticError, QuadraticSymbol, _wrap,
                     symplectic_matrix)

__all__ = [
    "positive_definite_direction", "SimultaneousReduction",
    "simultaneous_reduce", "williamson", "NormalForm1D", "reduce_1d",
]

SCAN_POINTS = 720


def _rotated_parts(Q, theta):
    """Real and imaginary parts of ``e^{i theta} Q``."""
    c, s = np.cos(theta), np.sin(theta)
    return c * Q.real - s * Q.imag, s * Q.real + c * Q.imag


def _margin(Q, theta):
    return np.linalg.eigvalsh(_rotated_parts(Q, theta)[0])[0]


def positive_definite_direction(q, return_margin=False, strict=True):
    """
    Angle ``theta`` maximizing the smallest eigenvalue of ``Re(e^{i theta} q)``.

    The angle is located on a uniform grid of 720 points in (-pi, pi] and
    refined by a bounded scalar search to 1e-10.

    Returns
    -------
    theta : float or None
        ``None`` when no direction makes the real part positive definite.
    margin : float
        Only with ``return_margin``; the smallest eigenvalue at ``theta``
        (the best value found when ``theta`` is None).

    Raises
    ------
    NonEllipticError
        With ``strict``, if ``q`` is not elliptic.
    """
    Q = q.Q
    step = 2 * np.pi / SCAN_POINTS
    grid = -np.pi + step * np.arange(1, SCAN_POINTS + 1)
    margins = np.array([_margin(Q, t) for t in grid])
    k = int(np.argmax(margins))
    res = minimize_scalar(lambda t: -_margin(Q, t),
                          bounds=(grid[k] - step, grid[k] + step),
                          method="bounded", options={"xatol": 1e-10})
    theta, margin = float(res.x), float(-res.fun)
    if margin < margins[k]:
        theta, margin = float(grid[k]), float(margins[k])
    theta = _wrap(theta)
    if margin <= 1e-10 * max(q.norm, 1e-300):
        if strict:
            from .symbol import is_elliptic
            if q.n > 1 or not is_elliptic(q)[0]:
                raise NonEllipticError("symbol is not elliptic")
        theta = None
    if return_margin:
        return theta, margin
    return theta


@dataclass(frozen=True)
class SimultaneousReduction:
    """
    Congruence ``P`` with ``P^T Re(e^{i theta} Q) P = I`` and
    ``P^T Im(e^{i theta} Q) P = diag(alphas)``.
    """

    P: np.ndarray
    alphas: np.ndarray
    certificate_angle: float

    def eigenspace(self, which, rtol=1e-9):
        """Columns of ``P`` belonging to the smallest (0) or largest (-1) alpha."""
        a = self.alphas
        target = a[which]
        tol = rtol * (1 + abs(a[0]) + abs(a[-1]))
        return self.P[:, np.abs(a - target) <= tol]

    def boundary_value(self, which):
        """Value of ``q`` on a unit vector of the extremal eigenspace."""
        return np.exp(-1j * self.certificate_angle) * (1 + 1j * self.alphas[which])


def simultaneous_reduce(q, theta):
    """
    Reduce ``Re(e^{i theta} q)`` to the identity and ``Im(e^{i theta} q)``
    to a diagonal form with one real congruence.

    Raises
    ------
    ValueError
        If the rotated real part is not positive definite.
    """
    R, J = _rotated_parts(q.Q, theta)
    try:
        cholesky(R)
    except LinAlgError as exc:
        raise ValueError("rotated real part is not positive definite") from exc
    alphas, P = eigh(J, R)
    return SimultaneousReduction(P, alphas, float(theta))


def williamson(m, rtol=1e-8):
    """
    Symplectic diagonalization of a positive definite real quadratic form.

    Parameters
    ----------
    m : array_like or RealQuadraticForm
        Symmetric positive definite ``2n x 2n`` matrix.

    Returns
    -------
    S : ndarray
        Real symplectic matrix with ``S^T M S = diag(lambdas, lambdas)``.
    lambdas : ndarray
        Symplectic eigenvalues in ascending order.
    """
    M = np.asarray(getattr(m, "M", m), dtype=float)
    M = (M + M.T) / 2
    try:
        cholesky(M)
    except LinAlgError as exc:
        raise ValueError("Williamson reduction needs a positive definite form") from exc
    n = M.shape[0] // 2
    J = symplectic_matrix(n)
    K = -J @ M
    w, V = np.linalg.eig(K)
    up = np.flatnonzero(w.imag > 0)
    up = up[np.argsort(w[up].imag)]
    if len(up) != n:
        raise ValueError("Hamilton map of a positive form must have n eigenvalues +i*lambda")
    lams = w[up].imag
    scale = max(np.abs(lams).max(), 1e-300)
    # group numerically equal symplectic eigenvalues
    groups, start = [], 0
    for i in range(1, n + 1):
        if i == n or lams[i] - lams[i - 1] > rtol * scale:
            groups.append(np.arange(start, i))
            start = i
    S = np.zeros((2 * n, 2 * n))
    lambdas = np.zeros(n)
    for g in groups:
        lam = lams[g].mean()
        # re-extract an accurate eigenbasis for the cluster
        Vg = V[:, up[g]]
        if len(g) > 1:
            Vg = np.linalg.svd(K - 1j * lam * np.eye(2 * n))[2].conj().T[:, -len(g):]
        G = 0.5j * Vg.conj().T @ J @ Vg
        G = (G + G.conj().T) / 2
        L = cholesky(G, lower=True)
        Vg = Vg @ np.linalg.inv(L).conj().T
        for col, j in zip(Vg.T, g):
            xs = col[:n]
            p = int(np.argmax(np.abs(xs)))
            col = col * np.exp(-1j * np.angle(xs[p]))
            S[:, j] = col.real
            S[:, n + j] = col.imag
            lambdas[j] = lam
    return S, lambdas


@dataclass(frozen=True)
class NormalForm1D:
    """
    One-dimensional normal form ``q o S``.

    ``kind`` is ``"TypeI"`` for ``alpha (xi^2 + e^{i theta} x^2)``,
    ``"TypeII"`` for ``alpha (xi + i x)(xi + eta x)`` with ``Im eta > 0`` and
    ``"TypeIII"`` for ``alpha (xi - i x)(xi + eta x)`` with ``Im eta < 0``.
    """

    kind: str
    alpha: complex
    S: np.ndarray
    theta: float | None = None
    eta: complex | None = None

    @property
    def fredholm_index(self):
        return {"TypeI": 0, "TypeII": -2, "TypeIII": 2}[self.kind]

    def symbol(self):
        """The normal-form symbol itself."""
        a = self.alpha
        if self.kind == "TypeI":
            return QuadraticSymbol.from_monomials(
                1, {(1, 1): a, (0, 0): a * np.exp(1j * self.theta)})
        s = 1j if self.kind == "TypeII" else -1j
        # (xi + s x)(xi + eta x)
        return QuadraticSymbol.from_monomials(
            1, {(1, 1): a, (0, 1): a * (s + self.eta), (0, 0): a * s * self.eta})

    def to_dict(self):
        out = {"kind": self.kind, "alpha": [self.alpha.real, self.alpha.imag],
               "S": self.S.tolist(), "fredholm_index": self.fredholm_index}
        if self.theta is not None:
            out["theta"] = float(self.theta)
        if self.eta is not None:
            out["eta"] = [self.eta.real, self.eta.imag]
        return out


def reduce_1d(q):
    """
    Normal form of an elliptic symbol in dimension one.

    Raises
    ------
    ValueError
        If ``q`` is not one-dimensional.
    NonEllipticError
        If ``q`` is not elliptic.
    """
    from .symbol import _quadratic_roots_1d, is_elliptic

    if q.n != 1:
        raise ValueError("reduce_1d needs a one-dimensional symbol")
    elliptic, _ = is_elliptic(q)
    if not elliptic:
        raise NonEllipticError("symbol is not elliptic")
    theta_star = positive_definite_direction(q)
    if theta_star is not None:
        R, Jm = _rotated_parts(q.Q, theta_star)
        S1, _ = williamson(R)
        _, O = np.linalg.eigh(S1.T @ Jm @ S1)
        if np.linalg.det(O) < 0:
            O[:, 1] = -O[:, 1]
        S = S1 @ O
        D = S.T @ (np.exp(1j * theta_star) * q.Q) @ S
        c1, c2 = D[0, 0], D[1, 1]
        if np.angle(c1 / c2) < 0:
            S = S @ np.array([[0.0, 1.0], [-1.0, 0.0]])
            c1, c2 = c2, c1
        s = (abs(c2) / abs(c1)) ** 0.25
        S = S @ np.diag([s, 1 / s])
        theta = float(np.angle(c1 / c2))
        alpha = complex(np.exp(-1j * theta_star) * c2 / s ** 2)
        return NormalForm1D("TypeI", alpha, S, theta=theta)

    a = q.Q[1, 1]
    roots = sorted(_quadratic_roots_1d(q), key=lambda r: (abs(r.imag), r.real))
    l1, l2 = roots
    s = abs(l1.imag) ** -0.5
    shear = np.array([[1.0, 0.0], [l1.real, 1.0]])
    S = shear @ np.diag([s, 1 / s])
    eta = complex((l1.real - l2) * s ** 2)
    alpha = complex(a / s ** 2)
    kind = "TypeII" if l1.imag < 0 else "TypeIII"
    return NormalForm1D(kind, alpha, S, eta=eta)
