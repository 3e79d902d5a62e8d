"""
Hermite (Fock) basis discretization of quadratic Weyl operators.

Per mode, position and ``D = -i d/dx`` are realized with ladder operators,
``x = (a + a^+)/sqrt(2)`` and ``D = i (a^+ - a)/sqrt(2)``. Products are formed
in a basis two states larger than the cutoff and then cropped, so the result
is the exact compression of the operator onto the first ``N`` Hermite
functions of each mode.
"""

from __future__ import annotations

import json
import os
import struct
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .symbol import QuadraticSymbol

__all__ = ["ladder_matrices", "FockOperator", "assemble_weyl_matrix",
           "truncation_check", "BudgetExceeded", "budget_rows",
           "dump_matrix", "load_matrix", "DEFAULT_BUDGET_ROWS"]

DEFAULT_BUDGET_ROWS = 4096
MAGIC = b"QSPC"


class BudgetExceeded(MemoryError):
    """The requested discretization exceeds the matrix-size budget."""


def budget_rows():
    """Row budget, overridable through ``QUADSPEC_BUDGET_ROWS``."""
    return int(os.environ.get("QUADSPEC_BUDGET_ROWS", DEFAULT_BUDGET_ROWS))


def ladder_matrices(N):
    """
    Truncated annihilation and creation matrices.

    Returns ``(a, a_dag)`` of shape ``(N, N)`` with ``a[k-1, k] = sqrt(k)``.
    """
    if N < 2:
        raise ValueError("need at least two basis states")
    a = np.diag(np.sqrt(np.arange(1, N)), 1)
    return a, a.T.copy()


def _mode_ops(N):
    a, ad = ladder_matrices(N + 2)
    X = (a + ad) / np.sqrt(2)
    D = 1j * (ad - a) / np.sqrt(2)
    return X, D


@dataclass(frozen=True)
class FockOperator:
    """
    Compression of ``q^w`` onto the tensor Hermite basis.

    Basis states are multi-indices ``(k_1, ..., k_n)`` with ``0 <= k_j < N``,
    ordered mixed-radix little-endian (``k_1`` varies fastest).
    """

    n: int
    cutoff: int
    A: sp.csr_matrix
    symbol_hash: str

    @property
    def dim(self):
        return self.A.shape[0]

    def dense(self):
        return self.A.toarray()

    def shifted(self, z):
        return (self.A - z * sp.identity(self.dim, dtype=complex, format="csr")).tocsc()


def _embed(ops, n):
    """Kronecker product of per-mode operators (mode 0 fastest)."""
    out = sp.csr_matrix(np.ones((1, 1), dtype=complex))
    for j in reversed(range(n)):
        out = sp.kron(out, ops[j], format="csr")
    return out


def assemble_weyl_matrix(q, N, budget=None):
    """
    Matrix of ``q^w`` on the first ``N`` Hermite functions per mode.

    Raises
    ------
    BudgetExceeded
        If ``N**n`` exceeds the row budget.
    """
    n = q.n
    budget = budget_rows() if budget is None else budget
    if N ** n > budget:
        raise BudgetExceeded(f"{N}**{n} = {N ** n} rows exceeds budget {budget}")
    X, D = _mode_ops(N)
    crop = slice(0, N)
    base = [X, D]
    eye = sp.identity(N, dtype=complex, format="csr")
    A = sp.csr_matrix((N ** n, N ** n), dtype=complex)
    for j in range(2 * n):
        for k in range(j, 2 * n):
            c = q.Q[j, k] if j == k else 2 * q.Q[j, k]
            if c == 0:
                continue
            mj, tj = j % n, j // n
            mk, tk = k % n, k // n
            ops = [eye] * n
            if mj == mk:
                P = base[tj] @ base[tk]
                if tj != tk:
                    P = (P + base[tk] @ base[tj]) / 2
                ops = list(ops)
                ops[mj] = sp.csr_matrix(P[crop, crop])
            else:
                ops = list(ops)
                ops[mj] = sp.csr_matrix(base[tj][crop, crop])
                ops[mk] = sp.csr_matrix(base[tk][crop, crop])
            A = A + c * _embed(ops, n)
    A.eliminate_zeros()
    return FockOperator(n, N, A.tocsr(), q.digest())


def truncation_check(q, z, N, rtol=1e-2, budget=None):
    """
    Compare ``sigma_min(A_N - z)`` with ``sigma_min(A_2N - z)``.

    Returns ``(converged, value_N, value_2N)``.
    """
    from .resolvent import smallest_singular_value

    v1 = smallest_singular_value(assemble_weyl_matrix(q, N, budget).shifted(z))
    v2 = smallest_singular_value(assemble_weyl_matrix(q, 2 * N, budget).shifted(z))
    converged = abs(v1 - v2) <= rtol * max(abs(v2), 1e-300)
    return converged, v1, v2


def dump_matrix(op, path):
    """
    Write the dense matrix as ``QSPC`` binary plus a JSON sidecar.

    Layout: magic ``b"QSPC"``, ``n`` and ``N`` as little-endian uint32, then
    row-major complex entries as pairs of little-endian float64.
    """
    path = os.fspath(path)
    M = op.dense()
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<II", op.n, op.cutoff))
        fh.write(np.ascontiguousarray(M).astype("<c16").tobytes())
    meta = {"n": op.n, "N": op.cutoff, "dim": op.dim, "symbol_hash": op.symbol_hash,
            "dtype": "complex128-le", "order": "row-major",
            "basis": "mixed-radix little-endian"}
    with open(path + ".json", "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
    return path


def load_matrix(path):
    """Read a ``QSPC`` file; returns ``(n, N, matrix)``."""
    with open(path, "rb") as fh:
        if fh.read(4) != MAGIC:
            raise ValueError("not a QSPC matrix file")
        n, N = struct.unpack("<II", fh.read(8))
        data = np.frombuffer(fh.read(), dtype="<c16")
    dim = N ** n
    if data.size != dim * dim:
        raise ValueError("truncated QSPC payload")
    return n, N, data.reshape(dim, dim).astype(complex)
