"""Exact ground-state reference via dense or sparse diagonalization.

Provides the dense-matrix rendering of Pauli-sum Hamiltonians and the exact
lowest eigenvalue, optionally restricted to a fixed-electron-number sector.
Every numerical claim elsewhere in the package is checked against this
module, so it stays deliberately simple: build the matrix, call the
eigensolver.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.linalg
import scipy.sparse
import scipy.sparse.linalg

from .pauli import PauliString, QubitHamiltonian

__all__ = [
    "DENSE_MAX_QUBITS",
    "ORACLE_MAX_QUBITS",
    "GroundState",
    "to_dense",
    "exact_ground",
]

# Full dense diagonalization up to 12 qubits; iterative extremal
# eigensolver for 13-14; larger inputs are refused.
DENSE_MAX_QUBITS = 12
ORACLE_MAX_QUBITS = 14

_DEGENERACY_GAP = 1e-9


def _check_size(n_qubits: int) -> None:
    if n_qubits > ORACLE_MAX_QUBITS:
        raise ValueError(
            f"oracle ceiling is {ORACLE_MAX_QUBITS} qubits, got {n_qubits}"
        )


@dataclass(frozen=True, slots=True)
class GroundState:
    """Lowest eigenvalue with one representative eigenvector."""

    energy: float
    vector: np.ndarray
    degenerate: bool


def to_dense(h: QubitHamiltonian | PauliString) -> np.ndarray:
    """Dense matrix of a Pauli sum (or a single string) in the shared basis.

    Row/column index b has qubit i at bit i. Built term by term from the
    action P|b> = i^{|x&z|} (-1)^{|b&z|} |b ^ x> rather than Kronecker
    products, so the bit convention cannot drift from the simulator's.
    """
    if isinstance(h, PauliString):
        h = QubitHamiltonian(h.n_qubits, {h: 1.0})
    _check_size(h.n_qubits)
    dim = 1 << h.n_qubits
    idx = np.arange(dim, dtype=np.uint64)
    mat = np.zeros((dim, dim), dtype=np.complex128)
    phases = np.array([1, 1j, -1, -1j], dtype=np.complex128)
    for p, c in h.items():
        parity = np.bitwise_count(idx & np.uint64(p.z_mask)).astype(np.int64) & 1
        k = ((p.x_mask & p.z_mask).bit_count() + 2 * parity) % 4
        rows = (idx ^ np.uint64(p.x_mask)).astype(np.int64)
        mat[rows, idx.astype(np.int64)] += c * phases[k]
    return mat


def _to_sparse(h: QubitHamiltonian) -> scipy.sparse.csr_matrix:
    dim = 1 << h.n_qubits
    idx = np.arange(dim, dtype=np.uint64)
    phases = np.array([1, 1j, -1, -1j], dtype=np.complex128)
    rows_all = []
    cols_all = []
    vals_all = []
    for p, c in h.items():
        parity = np.bitwise_count(idx & np.uint64(p.z_mask)).astype(np.int64) & 1
        k = ((p.x_mask & p.z_mask).bit_count() + 2 * parity) % 4
        rows_all.append((idx ^ np.uint64(p.x_mask)).astype(np.int64))
        cols_all.append(idx.astype(np.int64))
        vals_all.append(c * phases[k])
    return scipy.sparse.csr_matrix(
        (np.concatenate(vals_all), (np.concatenate(rows_all), np.concatenate(cols_all))),
        shape=(dim, dim),
    )


def _sector_indices(
    n_qubits: int, n_electrons: int, occupation_of: Callable[[np.ndarray], np.ndarray]
) -> np.ndarray:
    """Basis indices whose decoded occupation has the requested electron count."""
    idx = np.arange(1 << n_qubits, dtype=np.uint64)
    occ = occupation_of(idx)
    counts = np.bitwise_count(occ).astype(np.int64)
    return np.flatnonzero(counts == n_electrons)


def exact_ground(
    h: QubitHamiltonian,
    n_electrons: int | None = None,
    occupation_of: Callable[[np.ndarray], np.ndarray] | None = None,
) -> GroundState:
    """Lowest eigenvalue and eigenvector of the Pauli sum.

    With `n_electrons` given, the search is restricted to the particle
    sector: basis states are kept iff `occupation_of` (the inverse of the
    fermion-to-qubit encoding, vectorized over index arrays) decodes them
    to the requested electron count. The returned vector is always at the
    full 2^n dimension. Degeneracy is flagged when the gap to the next
    eigenvalue is below 1e-9.
    """
    _check_size(h.n_qubits)
    dim = 1 << h.n_qubits

    keep: np.ndarray | None = None
    if n_electrons is not None:
        if occupation_of is None:
            raise ValueError("particle-sector restriction needs an occupation decoder")
        keep = _sector_indices(h.n_qubits, n_electrons, occupation_of)
        if keep.size == 0:
            raise ValueError(
                f"empty particle sector: {n_electrons} electrons on {h.n_qubits} qubits"
            )

    if h.n_qubits <= DENSE_MAX_QUBITS:
        mat = to_dense(h)
        if keep is not None:
            mat = mat[np.ix_(keep, keep)]
        if mat.shape[0] == 1:
            vals = np.array([mat[0, 0].real])
            vecs = np.ones((1, 1), dtype=np.complex128)
            degenerate = False
        else:
            vals, vecs = scipy.linalg.eigh(mat)
            degenerate = bool(vals[1] - vals[0] < _DEGENERACY_GAP)
        energy = float(vals[0])
        small = vecs[:, 0].astype(np.complex128)
    else:
        mat = _to_sparse(h)
        if keep is not None:
            mat = mat[keep][:, keep]
        k = min(2, mat.shape[0] - 1)
        vals, vecs = scipy.sparse.linalg.eigsh(mat, k=k, which="SA")
        order = np.argsort(vals)
        vals, vecs = vals[order], vecs[:, order]
        degenerate = bool(k >= 2 and vals[1] - vals[0] < _DEGENERACY_GAP)
        energy = float(vals[0])
        small = vecs[:, 0].astype(np.complex128)

    if keep is None:
        vector = small
    else:
        vector = np.zeros(dim, dtype=np.complex128)
        vector[keep] = small
    vector = vector / np.linalg.norm(vector)
    return GroundState(energy=energy, vector=vector, degenerate=degenerate)
