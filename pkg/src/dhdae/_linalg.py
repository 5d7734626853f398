"""Shared numerical helpers: tolerances, Hermitian tests, kernels, orthonormalization.

All tolerances are relative to the spectral norm of the matrix being tested,
so the checks are scale invariant.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg

#: symmetry / definiteness tolerance, relative to the spectral norm
TOL_SYM = 1e-10
TOL_PSD = 1e-10
#: invertibility threshold on sigma_min / sigma_max
TOL_INV = 1e-12
#: default sample points for pencil regularity probing
DEFAULT_S_SAMPLES = (1.0 + 0.0j, 1.0 + 1.0j, 10.0 + 0.0j)


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    """Coerce to a 2-D complex array and reject non-finite entries."""
    m = np.asarray(a, dtype=np.complex128)
    if m.ndim != 2:
        raise ValueError(f"{name} must be two-dimensional, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError(f"{name} contains non-finite entries")
    return m


def as_vector(a, name: str = "vector") -> np.ndarray:
    v = np.asarray(a, dtype=np.complex128).reshape(-1)
    if not np.all(np.isfinite(v)):
        raise ValueError(f"{name} contains non-finite entries")
    return v


def spectral_norm(m: np.ndarray) -> float:
    if m.size == 0:
        return 0.0
    return float(np.linalg.norm(m, 2))


def herm_part(m: np.ndarray) -> np.ndarray:
    return 0.5 * (m + m.conj().T)


def skew_part(m: np.ndarray) -> np.ndarray:
    return 0.5 * (m - m.conj().T)


def is_hermitian(m: np.ndarray, tol: float = TOL_SYM) -> bool:
    scale = spectral_norm(m)
    if scale == 0.0:
        return True
    return spectral_norm(m - m.conj().T) <= tol * scale


def max_herm_eig(m: np.ndarray) -> float:
    """Largest eigenvalue of the Hermitian part."""
    if m.size == 0:
        return 0.0
    return float(np.max(np.linalg.eigvalsh(herm_part(m))))


def min_herm_eig(m: np.ndarray) -> float:
    if m.size == 0:
        return 0.0
    return float(np.min(np.linalg.eigvalsh(herm_part(m))))


def sigma_extents(m: np.ndarray) -> tuple[float, float]:
    """(sigma_min, sigma_max); (0, 0) for an empty matrix."""
    if m.size == 0:
        return 0.0, 0.0
    s = np.linalg.svd(m, compute_uv=False)
    return float(s[-1]), float(s[0])


def is_invertible(m: np.ndarray, tol: float = TOL_INV) -> bool:
    if m.shape[0] != m.shape[1]:
        return False
    if m.shape[0] == 0:
        return True
    smin, smax = sigma_extents(m)
    if smax == 0.0:
        return False
    return smin / smax > tol


def cond_number(m: np.ndarray) -> float:
    """sigma_max / sigma_min, infinity for a numerically singular matrix."""
    if m.size == 0:
        return 1.0
    smin, smax = sigma_extents(m)
    if smin == 0.0 or smax / smin > 1.0 / TOL_INV:
        return np.inf
    return smax / smin


def nullspace(m: np.ndarray, tol: float = TOL_INV) -> np.ndarray:
    """Orthonormal basis of the kernel, as columns. Shape (cols, k)."""
    ncols = m.shape[1]
    if m.size == 0:
        return np.eye(ncols, dtype=np.complex128)
    u, s, vh = np.linalg.svd(m)
    smax = s[0] if s.size else 0.0
    rank = int(np.sum(s > tol * smax)) if smax > 0.0 else 0
    return vh[rank:].conj().T.copy()


def orth_columns(m: np.ndarray, tol: float = TOL_INV) -> np.ndarray:
    """Orthonormal basis of the column span."""
    if m.size == 0 or spectral_norm(m) == 0.0:
        return np.zeros((m.shape[0], 0), dtype=np.complex128)
    u, s, _ = np.linalg.svd(m, full_matrices=False)
    rank = int(np.sum(s > tol * s[0]))
    return u[:, :rank].copy()


def metric_orthonormalize(v: np.ndarray, k: np.ndarray) -> np.ndarray:
    """Orthonormalize the columns of v in the inner product <a, b> = b^H k a.

    k must be Hermitian positive definite; uses a Cholesky-backed QR, which is
    numerically equivalent to modified Gram-Schmidt in the weighted product.
    """
    if v.shape[1] == 0:
        return v.copy()
    l = scipy.linalg.cholesky(herm_part(k), lower=True)
    q, _ = np.linalg.qr(l.conj().T @ v)
    return scipy.linalg.solve_triangular(l.conj().T, q, lower=False)


def intersection_dim(u: np.ndarray, v: np.ndarray, tol: float = TOL_INV) -> int:
    """Dimension of span(u) ∩ span(v); u, v hold orthonormal columns."""
    ru, rv = u.shape[1], v.shape[1]
    if ru == 0 or rv == 0:
        return 0
    stacked = np.hstack([u, v])
    s = np.linalg.svd(stacked, compute_uv=False)
    rank = int(np.sum(s > tol * s[0]))
    return ru + rv - rank
