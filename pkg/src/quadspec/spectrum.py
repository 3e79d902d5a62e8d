"""
Exact eigenvalues of elliptic quadratic operators from the Hamilton map.

For an elliptic symbol whose numerical range is not the whole plane, the
spectrum of the Weyl quantization is the lattice

    { sum_lambda (r_lambda + 2 k_lambda) (-i lambda) : k_lambda in N }

over the eigenvalues ``lambda`` of the Hamilton map with ``-i lambda`` in the
numerical range (minus the origin); ``r_lambda`` is the algebraic multiplicity.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .symbol import SectorKind, hamilton_map, numerical_range

__all__ = ["SpectrumLattice", "hamilton_spectrum", "spectrum_lattice",
           "spectrum_distance", "default_radius"]


def hamilton_spectrum(q, rtol=1e-8):
    """
    Eigenvalues of the Hamilton map, clustered.

    Returns a list of ``(lambda, r)`` pairs: cluster mean and cluster size.
    Clustering is single-linkage with gap ``rtol * ||F||``.
    """
    F = hamilton_map(q).F
    w = np.linalg.eigvals(F)
    tol = rtol * max(np.linalg.norm(F, 2), 1e-300)
    remaining = list(range(len(w)))
    clusters = []
    while remaining:
        members = [remaining.pop(0)]
        grew = True
        while grew:
            grew = False
            for i in list(remaining):
                if min(abs(w[i] - w[m]) for m in members) <= tol:
                    members.append(i)
                    remaining.remove(i)
                    grew = True
        clusters.append((complex(np.mean(w[members])), len(members)))
    clusters.sort(key=lambda c: (c[0].real, c[0].imag))
    return clusters


@dataclass(frozen=True)
class SpectrumLattice:
    """
    Lattice generators and enumerated eigenvalues within ``radius``.

    ``generators`` holds ``(mu, r)`` with ``mu = -i lambda``; eigenvalues are
    sums ``sum (r + 2 k) mu``. ``boundary_flags`` lists generators whose
    membership in the numerical range was decided within the angle tolerance
    of its boundary.
    """

    generators: tuple
    eigenvalues: np.ndarray
    radius: float
    boundary_flags: tuple = ()

    @property
    def ground_state(self):
        return complex(sum(r * mu for mu, r in self.generators))

    def to_dict(self):
        return {
            "generators": [{"mu": [mu.real, mu.imag], "r": r} for mu, r in self.generators],
            "eigenvalues": [[v.real, v.imag] for v in self.eigenvalues],
            "radius": self.radius,
            "boundary_flags": [[mu.real, mu.imag] for mu in self.boundary_flags],
        }


def _enumerate(gens, radius):
    """All lattice sums of modulus <= radius (depth-first branch and bound)."""
    mus = np.array([mu for mu, _ in gens])
    # every generator has a positive component along the bisector direction
    d = np.exp(1j * np.angle(np.sum(mus / np.abs(mus))))
    proj = (mus * np.conj(d)).real
    if np.any(proj <= 0):
        raise ValueError("lattice generators do not lie in an open half-plane")
    steps = 2 * mus
    base = sum(r * mu for mu, r in gens)
    out = []

    def visit(i, acc):
        if (acc * np.conj(d)).real > radius * (1 + 1e-12):
            return
        if i == len(gens):
            if abs(acc) <= radius * (1 + 1e-12):
                out.append(acc)
            return
        k = 0
        while True:
            val = acc + k * steps[i]
            if (val * np.conj(d)).real > radius * (1 + 1e-12):
                break
            visit(i + 1, val)
            k += 1

    visit(0, base)
    return out


def spectrum_lattice(q, radius, atol=1e-8):
    """
    Eigenvalues of the Weyl quantization of ``q`` with modulus <= ``radius``.

    Raises
    ------
    ValueError
        If the numerical range is the whole plane.
    """
    sector = numerical_range(q)
    if sector.kind is SectorKind.FULL_PLANE:
        raise ValueError("the spectrum formula needs a numerical range other than C")
    gens = []
    flags = []
    for lam, r in hamilton_spectrum(q):
        mu = -1j * lam
        if abs(mu) <= 1e-12 * max(q.norm, 1e-300):
            continue
        if sector.contains(mu, atol=atol):
            gens.append((complex(mu), r))
            a = sector.relative_angle(mu)
            if min(abs(a), abs(a - sector.opening)) <= atol:
                flags.append(complex(mu))
    vals = _enumerate(gens, radius) if gens else []
    vals.sort(key=lambda v: (v.real, v.imag))
    dedup = []
    for v in vals:
        if not any(abs(v - u) <= 1e-9 * radius for u in dedup):
            dedup.append(v)
    dedup.sort(key=lambda v: (v.real, v.imag))
    return SpectrumLattice(tuple(gens), np.array(dedup, dtype=complex), float(radius),
                           tuple(flags))


def default_radius(q, z):
    """Smallest enumeration radius that is guaranteed to contain the eigenvalue nearest to ``z``."""
    lat = spectrum_lattice(q, 0.0)
    return 2 * abs(z) + abs(lat.ground_state)


def spectrum_distance(q, z, radius=None):
    """
    Distance from ``z`` to the spectrum.

    ``radius`` must be at least ``2|z| + |ground state|``: every eigenvalue
    farther out is farther from ``z`` than the ground state.
    """
    need = default_radius(q, z)
    if radius is None:
        radius = need
    elif radius < need * (1 - 1e-12):
        raise ValueError(f"radius {radius} too small, need at least {need}")
    lat = spectrum_lattice(q, radius)
    return float(np.min(np.abs(lat.eigenvalues - z)))
