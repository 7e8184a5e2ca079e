"""Dense complex linear algebra used throughout the engine.

Everything here is a thin, tolerance-explicit layer over LAPACK (via scipy):
matrix exponential, general non-Hermitian eigendecomposition with left
eigenvectors and residuals, and SVD-based numerical null spaces.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import DimensionError, NumericalError

#: condition number of the right-eigenvector matrix above which it is
#: treated as numerically singular (defective input)
DEFECTIVE_COND = 1e12


def as_square(a, name: str = "matrix") -> np.ndarray:
    """Return ``a`` as a finite complex square array, or raise DimensionError."""
    arr = np.asarray(a, dtype=complex)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] == 0:
        raise DimensionError(f"{name} must be a non-empty square matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise DimensionError(f"{name} contains non-finite entries")
    return arr


def expm(a) -> np.ndarray:
    """Matrix exponential by scaling and squaring with Pade approximants."""
    return scipy.linalg.expm(as_square(a))


@dataclass(frozen=True)
class EigenDecomposition:
    """Eigenvalues, right eigenvectors (columns) and left eigenvectors (rows).

    ``left[j] @ a == eigenvalues[j] * left[j]`` and, when the matrix is
    diagonalizable, ``left @ right == I``.
    """

    eigenvalues: np.ndarray
    right: np.ndarray
    left: np.ndarray
    condition_estimate: float
    residuals: np.ndarray

    @property
    def near_defective(self) -> bool:
        """True when the right eigenvectors are (numerically) linearly dependent."""
        return not self.condition_estimate < DEFECTIVE_COND

    def max_residual(self) -> float:
        return float(self.residuals.max()) if self.residuals.size else 0.0


def eig_general(a) -> EigenDecomposition:
    """Full eigendecomposition of a general complex matrix.

    Right eigenvectors are normalized to unit 2-norm. Left eigenvectors are
    the rows of ``inv(right)`` when that inverse is well conditioned, which
    makes them exactly biorthogonal to the right ones. For (nearly) defective
    input the LAPACK left vectors are returned instead, scaled so that
    ``left[j] @ right[:, j] == 1`` wherever that product is not tiny.
    Residuals ``|A v - q v| / |A|`` are reported per eigenpair.
    """
    a = as_square(a)
    try:
        w, vl, vr = scipy.linalg.eig(a, left=True, right=True)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise NumericalError(f"eigensolver failed for {a.shape[0]}x{a.shape[0]} input: {exc}") from exc

    vr = vr / np.linalg.norm(vr, axis=0)
    cond = float(np.linalg.cond(vr))
    if cond < DEFECTIVE_COND:
        left = np.linalg.inv(vr)
    else:
        left = vl.conj().T
        overlap = np.einsum("ij,ji->i", left, vr)
        scale = np.where(np.abs(overlap) > 1e-14, overlap, 1.0)
        left = left / scale[:, None]

    norm_a = np.linalg.norm(a, 2) or 1.0
    residuals = np.linalg.norm(a @ vr - vr * w, axis=0) / norm_a
    return EigenDecomposition(eigenvalues=w, right=vr, left=left, condition_estimate=cond, residuals=residuals)


def null_space(a, rank_tol: float = 1e-10) -> np.ndarray:
    """Orthonormal basis (columns) of the numerical null space of ``a``.

    Singular values at or below ``rank_tol * sigma_max`` count as zero. A zero
    matrix has a full null space.
    """
    if not rank_tol > 0:
        raise ValueError("rank_tol must be positive")
    arr = np.asarray(a, dtype=complex)
    if arr.ndim != 2:
        raise DimensionError(f"expected a matrix, got shape {arr.shape}")
    _, s, vh = np.linalg.svd(arr)
    n = arr.shape[1]
    smax = s[0] if s.size else 0.0
    if smax == 0.0:
        return np.eye(n, dtype=complex)
    padded = np.zeros(n)
    padded[: s.size] = s
    mask = padded <= rank_tol * smax
    return vh[mask].conj().T


def singular_values(a) -> np.ndarray:
    return np.linalg.svd(np.asarray(a, dtype=complex), compute_uv=False)


def solve(a, b) -> np.ndarray:
    """Solve ``a x = b``; raises NumericalError for a singular system."""
    try:
        return np.linalg.solve(as_square(a), np.asarray(b, dtype=complex))
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"singular linear system: {exc}") from exc
