"""
Level lines of the resolvent of the rotated harmonic oscillator
===============================================================

``H = D^2 + e^{i pi/4} x^2`` has eigenvalues ``e^{i pi/8}(2k+1)`` on a
single ray, yet its resolvent is huge far away from that ray. This script
computes ``log10 ||(H - z)^{-1}||`` on a box of the first quadrant and
extracts the level lines ``||(H - z)^{-1}|| = 1/eps``.

Each grid value is a smallest singular value of a Hermite-basis
compression whose size is doubled until two successive values agree to
one percent, so the picture is of the operator and not of one truncation.

Run with ``--full`` for the 200 x 150 grid over ``[0, 30] x [0, 20]``
(a few minutes on one core). The default is a coarser preview. The
command-line equivalent is::

    quadspec grid demos/symbols/rotated_oscillator.json \\
        --region 0,30,0,20 --res 200,150 --eps-levels 1e-1,1e-2,1e-3,1e-4 \\
        --out level_lines.csv
"""

import sys

import numpy as np

from quadspec.fixtures import rotated_oscillator
from quadspec.resolvent import pseudospectrum_grid, superlevel_components

full = "--full" in sys.argv
res = (200, 150) if full else (61, 41)
eps_levels = [1e-1, 1e-2, 1e-3, 1e-4]

q = rotated_oscillator(np.pi / 4)
grid = pseudospectrum_grid(q, (0, 30, 0, 20), res, eps_levels=eps_levels)
print(f"grid {res[0]} x {res[1]}: {grid.converged.mean():.0%} of points converged,"
      f" max cutoff {grid.cutoff_used.max()}, validation error {grid.validation_error:.1e}")

# %%
# How the superlevel sets ``{||R(z)|| >= 1/eps}`` split the eigenvalues.
# Small ``eps`` isolates every eigenvalue in its own island; larger ``eps``
# lets the islands beyond some modulus fuse into one region that reaches
# the edge of the box.

lam = np.exp(1j * np.pi / 8) * (2 * np.arange(20) + 1)
lam = lam[(lam.real <= 30) & (lam.imag <= 20)]
for eps in [0.3, 0.2, 0.1, 1e-2, 1e-3]:
    labels, count, touches = superlevel_components(grid, eps, lam, q)
    labels = np.asarray(labels)
    shared = [abs(v) for v, l in zip(lam, labels) if l >= 0 and np.sum(labels == l) > 1]
    where = f"merged from |lambda| = {min(shared):.1f}" if shared else "every eigenvalue isolated"
    print(f"eps = {eps:7.0e}: {count:3d} components, {where}")

# %%
# Save the raw grid and the level lines, and draw them if matplotlib is
# around.

grid.write_csv("level_lines.csv")
grid.write_level_lines("level_lines_levels.json")

try:
    import matplotlib.pyplot as plt
except ImportError:
    plt = None

if plt is not None:
    fig, ax = plt.subplots(figsize=(7.5, 5))
    vals = np.where(np.isfinite(grid.values), grid.values, np.nan)
    im = ax.pcolormesh(grid.re, grid.im, vals, shading="auto", cmap="viridis")
    fig.colorbar(im, ax=ax, label="log10 ||(H - z)^-1||")
    for eps, lines in grid.level_lines.items():
        for c in lines:
            ax.plot(c.real, c.imag, "w", lw=0.7)
    ax.plot(lam.real, lam.imag, "k.", ms=4)
    ax.set_xlabel("Re z")
    ax.set_ylabel("Im z")
    ax.set_aspect("equal")
    fig.savefig("level_lines.png", dpi=150, bbox_inches="tight")
    print("wrote level_lines.png")
