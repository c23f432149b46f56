"""Dense symmetric/Hermitian matrix primitives.

All routines work on plain numpy arrays: real symmetric matrices are float64
arrays kept exactly symmetric, Hermitian matrices are complex128 arrays.
Everything is pure; inputs are never mutated. Matrices here are small
(side <= ~200), so full dense eigendecompositions are used throughout.
"""

from __future__ import annotations

from typing import NamedTuple, Sequence

import numpy as np

__all__ = [
    "EigenDecomp",
    "eigh",
    "gram",
    "project_nonneg",
    "project_psd",
    "realify",
    "symmetrize",
]


def symmetrize(M: np.ndarray) -> np.ndarray:
    """Return (M + M^T)/2 as a new float array.

    Used on construction everywhere a symmetric matrix enters the system so
    that solver arithmetic cannot accumulate asymmetry drift.
    """
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {M.shape}")
    return (M + M.T) / 2


class EigenDecomp(NamedTuple):
    """Eigendecomposition with eigenvalues in non-increasing order.

    ``vectors`` is orthogonal and column k pairs with ``values[k]``, so
    ``vectors @ diag(values) @ vectors.T`` reconstructs the input.
    """

    values: np.ndarray
    vectors: np.ndarray


def eigh(M: np.ndarray) -> EigenDecomp:
    """Full eigendecomposition of a real symmetric matrix."""
    M = symmetrize(M)
    if M.shape[0] == 0:
        raise ValueError("empty matrix")
    w, V = np.linalg.eigh(M)
    return EigenDecomp(w[::-1].copy(), np.ascontiguousarray(V[:, ::-1]))


def project_psd(M: np.ndarray) -> np.ndarray:
    """Frobenius-nearest positive semidefinite matrix.

    Negative eigenvalues are clamped at exactly zero; downstream feasibility
    tolerances absorb floating-point noise.
    """
    values, vectors = eigh(M)
    clamped = np.maximum(values, 0.0)
    return symmetrize((vectors * clamped) @ vectors.T)


def project_nonneg(M: np.ndarray) -> np.ndarray:
    """Entrywise clamp at zero: the nearest entrywise-nonnegative matrix."""
    return np.maximum(np.asarray(M, dtype=float), 0.0)


def realify(H: np.ndarray) -> np.ndarray:
    """Map a Hermitian matrix H = R + iI to the real symmetric doubling.

    Returns the 2n x 2n matrix (1/sqrt(2)) [[R, -I], [I, R]]. The doubling
    is positive semidefinite exactly when H is, and it preserves the trace
    inner product: <realify(X), realify(Y)> == <X, Y> for Hermitian X, Y.
    The real/imaginary parts are cleaned to exactly symmetric/skew-symmetric
    on entry, mirroring `symmetrize`.
    """
    H = np.asarray(H, dtype=complex)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {H.shape}")
    R = (H.real + H.real.T) / 2
    I = (H.imag - H.imag.T) / 2
    return np.block([[R, -I], [I, R]]) / np.sqrt(2)


def gram(items: Sequence[np.ndarray]) -> np.ndarray:
    """Gram matrix of a family of vectors or matrices.

    Entry (i, j) is the Euclidean inner product <x_i, x_j> (the trace inner
    product when the family consists of matrices). All members must live in
    one inner-product space. The result is symmetric positive semidefinite.
    """
    arrays = [np.asarray(x) for x in items]
    if not arrays:
        raise ValueError("gram of an empty family")
    shape = arrays[0].shape
    if any(a.shape != shape for a in arrays):
        raise ValueError("gram family members must share one inner-product space")
    flat = np.stack([a.ravel() for a in arrays])
    G = flat.conj() @ flat.T
    return symmetrize(G.real if np.iscomplexobj(G) else G)
