"""Generalized maximum eigenvalue of an SPD pencil.

For SPD A and symmetric B, the largest mu with det(B - mu A) = 0 equals
sup_{v != 0} B(v,v) / A(v,v); this realizes the supremum-over-directions step
used by the cone-bounding inequality.  The scalar entry point delegates to
scipy; the batched versions use closed forms for d in {1, 2}, which is all the
torus domains need.
"""
from __future__ import annotations

import numpy as np
import scipy.linalg

from .domain import validate_spd
from .errors import DomainError, ShapeError


def spd_generalized_max_eigenvalue(A: np.ndarray, B: np.ndarray) -> float:
    """Largest generalized eigenvalue of the pencil (B, A), A SPD."""
    A = validate_spd(A, context="pencil matrix A")
    B = np.asarray(B, dtype=float)
    if B.shape != A.shape:
        raise ShapeError(f"pencil shapes differ: {A.shape} vs {B.shape}")
    if np.max(np.abs(B - B.T)) > 1e-10 * max(np.max(np.abs(B)), 1e-300):
        raise DomainError("pencil matrix B is not symmetric")
    vals = scipy.linalg.eigh(B, A, eigvals_only=True)
    return float(vals[-1])


def gen_max_eig_batch(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Batched largest generalized eigenvalue for (..., d, d) stacks, d <= 2.

    No SPD validation here; callers on hot paths validate at construction.
    """
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    d = A.shape[-1]
    if d == 1:
        return B[..., 0, 0] / A[..., 0, 0]
    if d == 2:
        # eigenvalues of C = A^{-1} B via trace/determinant
        detA = A[..., 0, 0] * A[..., 1, 1] - A[..., 0, 1] * A[..., 1, 0]
        detB = B[..., 0, 0] * B[..., 1, 1] - B[..., 0, 1] * B[..., 1, 0]
        # tr(A^{-1} B) = (A11 B00 + A00 B11 - A01 B10 - A10 B01) / detA
        tr = (
            A[..., 1, 1] * B[..., 0, 0]
            + A[..., 0, 0] * B[..., 1, 1]
            - A[..., 0, 1] * B[..., 1, 0]
            - A[..., 1, 0] * B[..., 0, 1]
        ) / detA
        det = detB / detA
        disc = np.sqrt(np.maximum(tr * tr - 4.0 * det, 0.0))
        return 0.5 * (tr + disc)
    out = np.empty(A.shape[:-2])
    flatA = A.reshape(-1, d, d)
    flatB = B.reshape(-1, d, d)
    flat = out.reshape(-1)
    for i in range(flatA.shape[0]):
        flat[i] = scipy.linalg.eigh(flatB[i], flatA[i], eigvals_only=True)[-1]
    return out


def gen_max_eig_direction(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Batched maximizing direction v (unit Euclidean norm) of B(v,v)/A(v,v)."""
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    d = A.shape[-1]
    if d == 1:
        return np.ones(A.shape[:-2] + (1,))
    mu = gen_max_eig_batch(A, B)
    # eigenvector of (B - mu A) v = 0: take the cross-form null direction
    M = B - mu[..., None, None] * A
    # for 2x2 singular M, (M11, -M10) and (M01, -M00) both lie in the kernel
    v1 = np.stack([M[..., 1, 1], -M[..., 1, 0]], axis=-1)
    v2 = np.stack([M[..., 0, 1], -M[..., 0, 0]], axis=-1)
    n1 = np.linalg.norm(v1, axis=-1)
    n2 = np.linalg.norm(v2, axis=-1)
    v = np.where((n1 >= n2)[..., None], v1, v2)
    n = np.linalg.norm(v, axis=-1, keepdims=True)
    # degenerate pencil (B proportional to A): any direction maximizes
    fallback = np.zeros_like(v)
    fallback[..., 0] = 1.0
    return np.where(n > 0, v / np.where(n > 0, n, 1.0), fallback)
