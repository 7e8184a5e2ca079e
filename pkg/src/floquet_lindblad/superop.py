"""Liouville-space representation of the master equation.

Column-stacking convention throughout: ``vec(X)`` stacks the columns of X,
so that ``vec(A @ X @ B) == kron(B.T, A) @ vec(X)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from .errors import DimensionError
from .model import LindbladModel, ensure_valid, hamiltonian_at

Kind = Literal["generator", "map"]


def vectorize(rho) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    return rho.reshape(-1, order="F")


def devectorize(v, dim: int | None = None) -> np.ndarray:
    v = np.asarray(v, dtype=complex)
    if dim is None:
        dim = int(round(np.sqrt(v.size)))
    if dim * dim != v.size:
        raise DimensionError(f"vector of length {v.size} is not a vectorized {dim}x{dim} matrix")
    return v.reshape((dim, dim), order="F")


@dataclass(frozen=True)
class Superoperator:
    dim_hilbert: int
    mat: np.ndarray
    kind: Kind = "generator"

    def __post_init__(self):
        n2 = self.dim_hilbert**2
        if self.mat.shape != (n2, n2):
            raise DimensionError(f"superoperator for N={self.dim_hilbert} must be {n2}x{n2}, got {self.mat.shape}")

    def trace_defect(self) -> float:
        """Max deviation of (vec I)^+ mat from 0 (generator) or (vec I)^+ (map)."""
        row = vectorize(np.eye(self.dim_hilbert)).conj() @ self.mat
        if self.kind == "map":
            row = row - vectorize(np.eye(self.dim_hilbert))
        return float(np.abs(row).max())

    def __matmul__(self, other: "Superoperator") -> "Superoperator":
        return Superoperator(self.dim_hilbert, self.mat @ other.mat, "map")


def commutator_superop(h) -> np.ndarray:
    """Matrix of X -> -i [h, X]."""
    h = np.asarray(h, dtype=complex)
    eye = np.eye(h.shape[0])
    return -1j * (np.kron(eye, h) - np.kron(h.T, eye))


def dissipator_superop(jump, rate: float) -> np.ndarray:
    """Matrix of X -> rate (L X L^+ - 1/2 {L^+ L, X})."""
    op = np.asarray(jump, dtype=complex)
    eye = np.eye(op.shape[0])
    ldl = op.conj().T @ op
    return rate * (np.kron(op.conj(), op) - 0.5 * np.kron(eye, ldl) - 0.5 * np.kron(ldl.T, eye))


def static_dissipator(model: LindbladModel) -> np.ndarray:
    n2 = model.dim**2
    d = np.zeros((n2, n2), dtype=complex)
    for j in model.jumps:
        if j.rate:
            d += dissipator_superop(j.operator, j.rate)
    return d


def liouvillian_matrix(h, jumps) -> np.ndarray:
    """Generator matrix for Hamiltonian ``h`` and ``(operator, rate)`` pairs."""
    mat = commutator_superop(h)
    for op, rate in jumps:
        if rate:
            mat = mat + dissipator_superop(op, rate)
    return mat


def build_liouvillian(model: LindbladModel, t: float, *, check: bool = True) -> Superoperator:
    """The generator L(t) at time ``t`` as an N^2 x N^2 matrix."""
    if check:
        ensure_valid(model)
    jumps = [(j.operator_at(model.omega, t), j.rate) for j in model.jumps]
    return Superoperator(model.dim, liouvillian_matrix(hamiltonian_at(model, t), jumps), "generator")


def apply(sop: Superoperator, rho) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (sop.dim_hilbert, sop.dim_hilbert):
        raise DimensionError(f"operator of shape {rho.shape} does not match N={sop.dim_hilbert}")
    return devectorize(sop.mat @ vectorize(rho), sop.dim_hilbert)


def identity_map(dim: int) -> Superoperator:
    return Superoperator(dim, np.eye(dim * dim, dtype=complex), "map")
