"""
Resolvent norms of quadratic Weyl operators from Hermite compressions.

``||(q^w - z)^{-1}||`` is approximated by ``1 / sigma_min(A_N - z)`` where
``A_N`` is the compression onto ``N`` Hermite functions per mode. The cutoff
is chosen per point and doubled until two successive cutoffs agree.
"""

from __future__ import annotations

import csv
import json
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy import ndimage
from scipy.linalg import schur, solve_triangular, svdvals

from .fock import BudgetExceeded, assemble_weyl_matrix, budget_rows
from .symbol import SectorKind, numerical_range

__all__ = [
    "smallest_singular_value", "resolvent_norm", "adaptive_resolvent_norm",
    "ResolventGrid", "pseudospectrum_grid", "superlevel_components",
    "HalflineProfile", "halfline_profile", "semiclassical_norm", "IndexFit",
    "fit_sc_index", "FitAborted", "DENSE_LIMIT", "INF_SURROGATE",
]

DENSE_LIMIT = 1500
INF_SURROGATE = 1e300
DOUBLING_RTOL = 1e-2


class FitAborted(RuntimeError):
    """A sample of the semiclassical fit did not converge."""

    def __init__(self, message, partial):
        super().__init__(message)
        self.partial = partial


def _sparse_sigma_min(M):
    lu = spla.splu(sp.csc_matrix(M))
    dim = M.shape[0]

    def apply(v):
        return lu.solve(lu.solve(v, trans="H"))

    op = spla.LinearOperator((dim, dim), matvec=apply, dtype=complex)
    v0 = np.random.default_rng(0).standard_normal(dim).astype(complex)
    lam = spla.eigsh(op, k=1, which="LM", v0=v0, tol=1e-12,
                     return_eigenvectors=False)[0]
    return float(1 / np.sqrt(abs(lam)))


def smallest_singular_value(M):
    """
    Smallest singular value of a square matrix.

    Dense SVD up to ``DENSE_LIMIT`` rows; above that, Lanczos on
    ``(M^* M)^{-1}`` through a sparse LU factorization.
    """
    dim = M.shape[0]
    if dim <= DENSE_LIMIT:
        dense = M.toarray() if sp.issparse(M) else np.asarray(M)
        return float(svdvals(dense)[-1])
    try:
        return _sparse_sigma_min(M)
    except RuntimeError:
        # exactly singular factorization
        return 0.0


def _norm_from_sigma(s):
    return INF_SURROGATE if s < 1e-300 else 1.0 / s


def resolvent_norm(q, z, N):
    """``1 / sigma_min(A_N - z)`` with a ``1e300`` surrogate at exact singularity."""
    return _norm_from_sigma(smallest_singular_value(assemble_weyl_matrix(q, N).shifted(z)))


class _SchurSolver:
    """
    Cached complex Schur form of ``A_N``; ``sigma_min(A_N - z)`` by Lanczos
    on ``((T - z)^* (T - z))^{-1}`` with triangular solves.
    """

    def __init__(self, q, N):
        A = assemble_weyl_matrix(q, N).dense()
        self.T, _ = schur(A, output="complex")
        self.dim = A.shape[0]
        self.N = N
        rng = np.random.default_rng(12345)
        v = rng.standard_normal(self.dim) + 1j * rng.standard_normal(self.dim)
        self.start = v / np.linalg.norm(v)

    def sigma_min(self, z, maxiter=60, rtol=1e-13):
        T1 = self.T - z * np.eye(self.dim)
        if np.min(np.abs(np.diag(T1))) < 1e-300:
            return 0.0
        Qs = [self.start]
        alphas, betas = [], []
        q_prev = np.zeros(self.dim, dtype=complex)
        beta = 0.0
        theta_old = 0.0
        theta = 0.0
        for k in range(maxiter):
            qk = Qs[-1]
            y = solve_triangular(T1, qk, trans="C", lower=False)
            w = solve_triangular(T1, y, lower=False)
            if not np.all(np.isfinite(w)):
                return 0.0
            w = w - beta * q_prev
            alpha = float(np.real(np.vdot(qk, w)))
            w = w - alpha * qk
            Qm = np.array(Qs).T
            w = w - Qm @ (Qm.conj().T @ w)
            alphas.append(alpha)
            Tk = np.diag(alphas) + np.diag(betas, 1) + np.diag(betas, -1)
            theta = float(np.linalg.eigvalsh(Tk)[-1])
            beta = float(np.linalg.norm(w))
            if k > 0 and abs(theta - theta_old) <= rtol * theta:
                break
            if beta <= 1e-14 * theta:
                break
            theta_old = theta
            betas.append(beta)
            q_prev = qk
            Qs.append(w / beta)
        return float(1 / np.sqrt(theta)) if theta > 0 else 0.0


class _Engine:
    """Per-symbol cache of solvers keyed by cutoff."""

    def __init__(self, q, budget=None):
        self.q = q
        self.budget = budget_rows() if budget is None else budget
        self._solvers = {}
        self._lock = threading.Lock()

    def sigma_min(self, z, N):
        dim = N ** self.q.n
        if dim > self.budget:
            raise BudgetExceeded(f"{dim} rows exceeds budget {self.budget}")
        if dim > DENSE_LIMIT:
            return smallest_singular_value(assemble_weyl_matrix(self.q, N, self.budget).shifted(z))
        with self._lock:
            if N not in self._solvers:
                self._solvers[N] = _SchurSolver(self.q, N)
            solver = self._solvers[N]
        return solver.sigma_min(z)

    def adaptive(self, z, N0=None, rtol=DOUBLING_RTOL):
        """Return ``(norm, converged, N)``; doubling stops at the budget."""
        N = initial_cutoff(self.q, z) if N0 is None else N0
        if N ** self.q.n > self.budget:
            # largest cutoff within the budget; the value is flagged
            N = int(np.floor(self.budget ** (1 / self.q.n) + 1e-9))
            if N < 2:
                raise BudgetExceeded(f"budget {self.budget} admits no basis")
            return _norm_from_sigma(self.sigma_min(z, N)), False, N
        s1 = self.sigma_min(z, N)
        while True:
            if (2 * N) ** self.q.n > self.budget:
                return _norm_from_sigma(s1), False, N
            s2 = self.sigma_min(z, 2 * N)
            if abs(s1 - s2) <= rtol * max(s2, 1e-300):
                return _norm_from_sigma(s2), True, 2 * N
            N, s1 = 2 * N, s2


def initial_cutoff(q, z):
    """Starting cutoff: 64 per mode (n = 1) or 24 (n >= 2), at least ``4|z|`` for n = 1."""
    if q.n == 1:
        N = 64
        while N < 4 * abs(z):
            N *= 2
        return N
    return 24


def adaptive_resolvent_norm(q, z, N0=None, rtol=DOUBLING_RTOL, budget=None):
    """
    Resolvent norm with cutoff doubling.

    Returns ``(norm, converged, cutoff)``; ``converged`` is False when the
    budget stopped the doubling before two cutoffs agreed to ``rtol``.
    """
    return _Engine(q, budget).adaptive(z, N0=N0, rtol=rtol)


# ---------------------------------------------------------------------------
# Grids and level lines
# ---------------------------------------------------------------------------

@dataclass
class ResolventGrid:
    """
    ``log10`` resolvent norms on a rectangular grid.

    ``values[i, j]`` belongs to ``re[j] + 1j * im[i]``. Points within 1e-9 of
    an eigenvalue hold ``+inf``.
    """

    region: tuple
    resolution: tuple
    re: np.ndarray
    im: np.ndarray
    values: np.ndarray
    converged: np.ndarray
    cutoff_used: np.ndarray
    level_lines: dict = field(default_factory=dict)
    validation_error: float = 0.0

    @property
    def points(self):
        return self.re[None, :] + 1j * self.im[:, None]

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["re", "im", "log10_norm", "converged", "cutoff"])
            for i, y in enumerate(self.im):
                for j, x in enumerate(self.re):
                    w.writerow([repr(float(x)), repr(float(y)), repr(float(self.values[i, j])),
                                int(self.converged[i, j]), int(self.cutoff_used[i, j])])

    def level_lines_json(self):
        out = []
        for eps in sorted(self.level_lines):
            out.append({"eps": eps, "log10_norm": float(-np.log10(eps)),
                        "polylines": [[[float(p.real), float(p.imag)] for p in line]
                                      for line in self.level_lines[eps]]})
        return out

    def write_level_lines(self, path):
        with open(path, "w") as fh:
            json.dump(self.level_lines_json(), fh, indent=1)


def _contours(re, im, values, level):
    from skimage.measure import find_contours

    finite = np.where(np.isfinite(values), values, np.nanmax(values[np.isfinite(values)]) + 10)
    lines = []
    for c in find_contours(finite, level):
        rows, cols = c[:, 0], c[:, 1]
        x = np.interp(cols, np.arange(len(re)), re)
        y = np.interp(rows, np.arange(len(im)), im)
        lines.append(x + 1j * y)
    return lines


def pseudospectrum_grid(q, region, resolution, eps_levels=(), rtol=DOUBLING_RTOL,
                        budget=None, workers=1, validate=10, seed=0):
    """
    Resolvent norms on a grid and epsilon level lines.

    Parameters
    ----------
    region : (re_min, re_max, im_min, im_max)
    resolution : (nx, ny)
    eps_levels : iterable of float
        Level lines ``||R(z)|| = 1/eps`` extracted by marching squares.
    workers : int
        Threads evaluating grid rows; the output does not depend on it.
    validate : int
        Number of random grid points re-checked with a dense SVD.
    """
    re_min, re_max, im_min, im_max = map(float, region)
    nx, ny = map(int, resolution)
    re = np.linspace(re_min, re_max, nx)
    im = np.linspace(im_min, im_max, ny)
    eng = _Engine(q, budget)
    lattice = None
    if numerical_range(q).kind is not SectorKind.FULL_PLANE:
        from .spectrum import spectrum_lattice
        rmax = max(abs(complex(a, b)) for a in (re_min, re_max) for b in (im_min, im_max))
        lattice = spectrum_lattice(q, rmax + 1).eigenvalues

    values = np.zeros((ny, nx))
    conv = np.zeros((ny, nx), dtype=bool)
    cut = np.zeros((ny, nx), dtype=int)

    # warm the solver cache serially so threads only read it
    for N in sorted({initial_cutoff(q, complex(x, y)) for x in (re_min, re_max)
                     for y in (im_min, im_max)}):
        if (N ** q.n) <= min(eng.budget, DENSE_LIMIT):
            eng.sigma_min(0.0, N)

    def row(i):
        out = []
        for j in range(nx):
            z = complex(re[j], im[i])
            if lattice is not None and len(lattice) and np.min(np.abs(lattice - z)) <= 1e-9:
                out.append((np.inf, True, 0))
                continue
            try:
                r, ok, N = eng.adaptive(z, rtol=rtol)
            except BudgetExceeded:
                out.append((np.nan, False, 0))
                continue
            out.append((np.log10(r), ok, N))
        return i, out

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(row, range(ny)))
    else:
        results = [row(i) for i in range(ny)]
    for i, out in results:
        for j, (v, ok, N) in enumerate(out):
            values[i, j], conv[i, j], cut[i, j] = v, ok, N

    err = 0.0
    if validate:
        rng = np.random.default_rng(seed)
        idx = [(int(rng.integers(ny)), int(rng.integers(nx))) for _ in range(validate)]
        for i, j in idx:
            N = cut[i, j]
            if N == 0 or not np.isfinite(values[i, j]) or N ** q.n > DENSE_LIMIT:
                continue
            z = complex(re[j], im[i])
            s = float(svdvals(assemble_weyl_matrix(q, N).dense() - z * np.eye(N ** q.n))[-1])
            err = max(err, abs(np.log10(_norm_from_sigma(s)) - values[i, j]))

    grid = ResolventGrid((re_min, re_max, im_min, im_max), (nx, ny), re, im, values,
                         conv, cut, validation_error=err)
    for eps in eps_levels:
        grid.level_lines[float(eps)] = _contours(re, im, values, -np.log10(eps))
    return grid


def superlevel_components(grid, eps, points, q=None):
    """
    Connected components of ``{||R|| >= 1/eps}`` and the component of each point.

    A point whose grid cell holds no superlevel node (a component smaller
    than the grid spacing, as happens around well-conditioned eigenvalues)
    gets a component of its own, provided the resolvent norm on a circle of
    half a grid spacing around it stays below the level; otherwise it is
    reported as unresolved (-1).

    Returns ``(labels_of_points, n_components, touches_border)`` where
    ``touches_border`` maps component labels to whether they reach the grid
    edge (open regions).
    """
    level = -np.log10(eps)
    mask = np.nan_to_num(grid.values, nan=-np.inf) >= level
    lab, count = ndimage.label(mask)
    border = set(np.unique(np.concatenate([lab[0], lab[-1], lab[:, 0], lab[:, -1]]))) - {0}
    dx = grid.re[1] - grid.re[0]
    dy = grid.im[1] - grid.im[0]
    eng = _Engine(q) if q is not None else None
    out = []
    for p in points:
        j = int(np.clip(np.searchsorted(grid.re, p.real) - 1, 0, len(grid.re) - 2))
        i = int(np.clip(np.searchsorted(grid.im, p.imag) - 1, 0, len(grid.im) - 2))
        cell = lab[i:i + 2, j:j + 2]
        ids = np.unique(cell[cell > 0])
        if len(ids):
            out.append(int(ids[0]))
            continue
        if eng is None:
            out.append(-1)
            continue
        r = 0.5 * min(dx, dy)
        ring = [p + r * np.exp(2j * np.pi * k / 16) for k in range(16)]
        inside = all(np.log10(eng.adaptive(w)[0]) < level for w in ring)
        if inside:
            count += 1
            out.append(count)
        else:
            out.append(-1)
    touches = {int(k): (k in border) for k in range(1, count + 1)}
    return out, count, touches


# ---------------------------------------------------------------------------
# Half-line profiles and semiclassical index
# ---------------------------------------------------------------------------

def _slope_tstat(x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    X = np.column_stack([x, np.ones_like(x)])
    coef, *_ = np.linalg.lstsq(X, y, rcond=None)
    resid = y - X @ coef
    dof = len(x) - 2
    sxx = np.sum((x - x.mean()) ** 2)
    if dof <= 0:
        return coef[0], np.inf if coef[0] > 0 else -np.inf
    se = np.sqrt(np.sum(resid ** 2) / dof / sxx)
    if se == 0:
        return coef[0], np.inf if coef[0] > 0 else -np.inf
    return coef[0], coef[0] / se


@dataclass(frozen=True)
class HalflineProfile:
    """
    Resolvent norms at ``eta * direction``.

    ``verdict`` is ``"Growth"`` when ``log ||R||`` has a positive slope in
    ``eta`` with t-statistic above 5 over the upper half of the window,
    ``"Bounded"`` when max/min of the norms is at most 10, and
    ``"Inconclusive"`` otherwise.
    """

    direction: complex
    etas: tuple
    norms: tuple
    converged: tuple
    cutoffs: tuple
    verdict: str
    slope: float
    tstat: float
    ratio: float

    def to_dict(self):
        return {"direction": [self.direction.real, self.direction.imag],
                "etas": list(self.etas), "norms": list(self.norms),
                "converged": list(self.converged), "cutoffs": list(self.cutoffs),
                "verdict": self.verdict, "slope": self.slope,
                "tstat": self.tstat, "ratio": self.ratio}


def classify_profile(etas, norms):
    """Return ``(verdict, slope, tstat, ratio)`` for a profile."""
    etas = np.asarray(etas, dtype=float)
    logs = np.log(np.asarray(norms, dtype=float))
    m = len(etas)
    top = max(3, m // 2 + 1) if m >= 3 else m
    slope, t = _slope_tstat(etas[m - top:], logs[m - top:])
    ratio = float(np.max(norms) / np.min(norms))
    if slope > 0 and t > 5:
        verdict = "Growth"
    elif ratio <= 10:
        verdict = "Bounded"
    else:
        verdict = "Inconclusive"
    return verdict, float(slope), float(t), ratio


def halfline_profile(q, z0, etas, rtol=DOUBLING_RTOL, budget=None):
    """Convergence-checked resolvent norms along the half-line ``z0 R_+``."""
    z0 = complex(z0)
    z0 = z0 / abs(z0)
    etas = tuple(float(e) for e in etas)
    if any(b <= a for a, b in zip(etas, etas[1:])) or etas[0] <= 0:
        raise ValueError("etas must be positive and strictly increasing")
    if numerical_range(q).kind is not SectorKind.FULL_PLANE:
        from .spectrum import spectrum_distance
        for eta in etas:
            if spectrum_distance(q, eta * z0) < 1e-6 * eta:
                raise ValueError(f"eta = {eta} puts the point on the spectrum")
    eng = _Engine(q, budget)
    norms, conv, cuts = [], [], []
    for eta in etas:
        r, ok, N = eng.adaptive(eta * z0, rtol=rtol)
        norms.append(float(r))
        conv.append(bool(ok))
        cuts.append(int(N))
    verdict, slope, t, ratio = classify_profile(etas, norms)
    return HalflineProfile(z0, etas, tuple(norms), tuple(conv), tuple(cuts),
                           verdict, slope, t, ratio)


def semiclassical_norm(q, z, h, rtol=DOUBLING_RTOL, budget=None, with_info=False):
    """
    ``||(q(x, h xi)^w - z)^{-1}|| = h^{-1} ||(q^w - z/h)^{-1}||``.

    With ``with_info`` returns ``(norm, converged, cutoff)``.
    """
    if not 0 < h <= 1:
        raise ValueError("h must lie in (0, 1]")
    r, ok, N = _Engine(q, budget).adaptive(complex(z) / h, rtol=rtol)
    value = r / h
    return (value, ok, N) if with_info else value


@dataclass(frozen=True)
class IndexFit:
    """Least-squares slope of ``log ||(P_h - z)^{-1}||`` against ``log(1/h)``."""

    z: complex
    hs: tuple
    sc_norms: tuple
    converged: tuple
    mu_hat: float
    residual: float

    def to_dict(self):
        return {"z": [self.z.real, self.z.imag], "hs": list(self.hs),
                "sc_norms": list(self.sc_norms), "converged": list(self.converged),
                "mu_hat": self.mu_hat, "residual": self.residual}


def fit_sc_index(q, z, hs, rtol=DOUBLING_RTOL, budget=None):
    """
    Fit the semiclassical growth exponent at ``z``.

    Raises
    ------
    ValueError
        With fewer than 4 values of ``h`` or a span below a factor 8.
    FitAborted
        If a sample did not converge; ``exc.partial`` holds the samples.
    """
    hs = tuple(sorted((float(h) for h in hs), reverse=True))
    if len(hs) < 4 or hs[0] / hs[-1] < 8:
        raise ValueError("need at least 4 values of h spanning a factor of 8")
    z = complex(z)
    eng = _Engine(q, budget)
    norms, conv = [], []
    for h in hs:
        r, ok, _ = eng.adaptive(z / h, rtol=rtol)
        norms.append(float(r / h))
        conv.append(bool(ok))
    x = np.log(1 / np.asarray(hs))
    y = np.log(np.asarray(norms))
    coef = np.polyfit(x, y, 1)
    resid = float(np.sqrt(np.mean((y - np.polyval(coef, x)) ** 2)))
    fit = IndexFit(z, hs, tuple(norms), tuple(conv), float(coef[0]), resid)
    if not all(conv):
        raise FitAborted("semiclassical sample did not converge", fit)
    return fit
