"""Extended-space (Shirley-Floquet) solvers.

Harmonic blocks are indexed l = -L..L and stored in that order. For the closed
problem the extended Hamiltonian has blocks

    (l, l')  ->  h[l - l'] - l * Omega * delta_{l l'} * I,

so a Floquet state psi(t) = exp(-i eps t) sum_l a[l] exp(-i l Omega t) solves
``h_SF a = eps a``. For the dissipative problem a periodic eigenmode
rho(t) = exp(lam t) sum_l r[l] exp(-i l Omega t) satisfies, block by block,

    lam r[l] = sum_l' -i[h[l - l'], r[l']] + i l Omega r[l] + D(r[l]),

which is assembled directly as a (2L+1) N^2 square matrix.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from .errors import ConfigurationError, DimensionError
from .linalg import eig_general
from .model import LindbladModel, ensure_valid
from .spectral import phase_factor
from .superop import commutator_superop, devectorize, liouvillian_matrix, static_dissipator, vectorize

Mode = Literal["full", "rwa"]
EDGE_WEIGHT_LIMIT = 0.01


@dataclass(frozen=True)
class SambeConfig:
    cutoff: int = 6
    mode: Mode = "full"

    def __post_init__(self):
        if int(self.cutoff) != self.cutoff or self.cutoff < 0:
            raise ConfigurationError(f"cutoff must be a nonnegative integer, got {self.cutoff}")
        if self.mode not in ("full", "rwa"):
            raise ConfigurationError(f"unknown mode {self.mode!r}")


@dataclass(frozen=True)
class SfHamiltonian:
    mat: np.ndarray
    omega: float
    cutoff: int
    dim: int

    def block(self, l: int, lp: int) -> np.ndarray:
        n, c = self.dim, self.cutoff
        i, j = (l + c) * n, (lp + c) * n
        return self.mat[i:i + n, j:j + n]


@dataclass(frozen=True)
class SfEigenmode:
    lam: complex
    blocks: dict
    edge_weight: float
    converged: bool

    def at(self, omega: float, t: float) -> np.ndarray:
        """Periodic part sum_l r[l] exp(-i l Omega t)."""
        return sum(m * np.exp(-1j * l * omega * t) for l, m in self.blocks.items())


def _check_cutoff(model: LindbladModel, cfg: SambeConfig) -> None:
    if cfg.mode == "full" and cfg.cutoff < model.max_harmonic:
        raise ConfigurationError(
            f"cutoff {cfg.cutoff} is below the largest drive harmonic {model.max_harmonic}"
        )


def _check_static_jumps(model: LindbladModel) -> None:
    if not all(j.is_static for j in model.jumps):
        raise ConfigurationError("time-periodic jump operators are not supported in the extended-space solver")


def build_sf_hamiltonian(model: LindbladModel, cfg: SambeConfig) -> SfHamiltonian:
    ensure_valid(model)
    if cfg.mode == "rwa":
        red = rwa_reduce(model)
        return SfHamiltonian(red.h, model.omega, 0, 2)
    _check_cutoff(model, cfg)
    n, c = model.dim, cfg.cutoff
    size = (2 * c + 1) * n
    mat = np.zeros((size, size), dtype=complex)
    for a, l in enumerate(range(-c, c + 1)):
        for b, lp in enumerate(range(-c, c + 1)):
            blk = model.h(l - lp).copy()
            if l == lp:
                blk = blk - l * model.omega * np.eye(n)
            mat[a * n:(a + 1) * n, b * n:(b + 1) * n] = blk
    return SfHamiltonian(mat, model.omega, c, n)


def sf_quasienergies(sf: SfHamiltonian) -> list[tuple[float, np.ndarray]]:
    """Eigenpairs of the (Hermitian) truncated extended Hamiltonian, ascending."""
    eps, vecs = np.linalg.eigh(sf.mat)
    return [(float(e), vecs[:, i]) for i, e in enumerate(eps)]


def edge_weight(vec: np.ndarray, block_size: int, cutoff: int) -> float:
    """Fraction of the squared norm carried by the outermost harmonic blocks."""
    if cutoff == 0:
        return 0.0
    v = np.abs(np.asarray(vec)) ** 2
    outer = v[:block_size].sum() + v[-block_size:].sum()
    return float(outer / v.sum())


def interior_quasienergies(sf: SfHamiltonian, limit: float = EDGE_WEIGHT_LIMIT) -> np.ndarray:
    return np.array([e for e, v in sf_quasienergies(sf) if edge_weight(v, sf.dim, sf.cutoff) < limit])


def sf_lindblad_matrix(model: LindbladModel, cutoff: int) -> np.ndarray:
    """Generator of the explicit-harmonic eigenmode equation on (2L+1) N^2 unknowns.

    Unknowns are ordered block by block (l = -L..L), each block the
    column-stacked vec of r[l].
    """
    n2 = model.dim**2
    size = (2 * cutoff + 1) * n2
    mat = np.zeros((size, size), dtype=complex)
    comms = {l: commutator_superop(m) for l, m in model.h_fourier.items()}
    diss = static_dissipator(model)
    for a, l in enumerate(range(-cutoff, cutoff + 1)):
        for b, lp in enumerate(range(-cutoff, cutoff + 1)):
            blk = comms.get(l - lp)
            if l == lp:
                blk = (blk if blk is not None else 0) + diss + 1j * l * model.omega * np.eye(n2)
            if blk is not None:
                mat[a * n2:(a + 1) * n2, b * n2:(b + 1) * n2] = blk
    return mat


def _unpack(vec: np.ndarray, dim: int, cutoff: int) -> dict:
    n2 = dim * dim
    return {l: devectorize(vec[a * n2:(a + 1) * n2], dim) for a, l in enumerate(range(-cutoff, cutoff + 1))}


def _normalize_blocks(blocks: dict) -> dict:
    ref = sum(blocks.values())
    if np.linalg.norm(ref) < 1e-12:
        ref = blocks[0]
    c = phase_factor(ref)
    return {l: c * m for l, m in blocks.items()}


def solve_sf_lindblad(model: LindbladModel, cfg: SambeConfig) -> list[SfEigenmode]:
    """All eigenmodes of the truncated extended-space master equation.

    Blocks are scaled so that the reconstructed operator at t = 0 follows the
    normalization and phase convention of the time-domain spectrum.
    """
    ensure_valid(model)
    _check_static_jumps(model)
    if cfg.mode == "rwa":
        red = rwa_reduce(model)
        dec = eig_general(liouvillian_matrix(red.h, [(j.operator, j.rate) for j in model.jumps]))
        modes = []
        for j, lam in enumerate(dec.eigenvalues):
            rho = devectorize(dec.right[:, j], 2)
            rho = phase_factor(rho) * rho
            modes.append(SfEigenmode(complex(lam), red.to_blocks(rho), 0.0, True))
        return modes
    _check_cutoff(model, cfg)
    dec = eig_general(sf_lindblad_matrix(model, cfg.cutoff))
    modes = []
    n2 = model.dim**2
    for j, lam in enumerate(dec.eigenvalues):
        v = dec.right[:, j]
        w = edge_weight(v, n2, cfg.cutoff)
        blocks = _normalize_blocks(_unpack(v, model.dim, cfg.cutoff))
        modes.append(SfEigenmode(complex(lam), blocks, w, w < EDGE_WEIGHT_LIMIT))
    return modes


@dataclass(frozen=True)
class SfSteadyState:
    blocks: dict
    omega: float
    residual: float

    def at(self, t: float) -> np.ndarray:
        return sum(m * np.exp(-1j * l * self.omega * t) for l, m in self.blocks.items())


def sf_steady_state(model: LindbladModel, cfg: SambeConfig) -> SfSteadyState:
    """The lam = 0 eigenmode, normalized so that Tr r[0] = 1.

    The trace of block 0 is an exact left null vector of the truncated
    generator, so the null vector is taken from the smallest singular value.
    """
    ensure_valid(model)
    _check_static_jumps(model)
    if cfg.mode == "rwa":
        red = rwa_reduce(model)
        mat = liouvillian_matrix(red.h, [(j.operator, j.rate) for j in model.jumps])
        _, _, vh = np.linalg.svd(mat)
        rho = devectorize(vh[-1].conj(), 2)
        rho = rho / np.trace(rho)
        rho = (rho + rho.conj().T) / 2
        res = float(np.linalg.norm(mat @ vectorize(rho)))
        return SfSteadyState(red.to_blocks(rho), model.omega, res)
    _check_cutoff(model, cfg)
    mat = sf_lindblad_matrix(model, cfg.cutoff)
    _, _, vh = np.linalg.svd(mat)
    v = vh[-1].conj()
    blocks = _unpack(v, model.dim, cfg.cutoff)
    tr = np.trace(blocks[0])
    if abs(tr) < 1e-14:
        raise ConfigurationError("steady extended-space mode has no weight on the zeroth harmonic")
    blocks = {l: m / tr for l, m in blocks.items()}
    v = v / tr
    return SfSteadyState(blocks, model.omega, float(np.linalg.norm(mat @ v)))


# ----------------------------------------------------------------------------- two-level reduction


@dataclass(frozen=True)
class RwaReduction:
    """Resonant 2x2 block of the extended problem.

    ``h`` acts on the pair (band 1 at l = -1, band 2 at l = 0). A reduced
    operator r maps back to harmonic blocks r[0] = diag(r11, r22),
    r[-1] = r12 at (1, 2) and r[1] = r21 at (2, 1).
    """
    h: np.ndarray
    omega: float

    @staticmethod
    def to_blocks(rho_red) -> dict:
        rho_red = np.asarray(rho_red, dtype=complex)
        z = np.zeros((2, 2), dtype=complex)
        b0, bm, bp = z.copy(), z.copy(), z.copy()
        b0[0, 0], b0[1, 1] = rho_red[0, 0], rho_red[1, 1]
        bm[0, 1] = rho_red[0, 1]
        bp[1, 0] = rho_red[1, 0]
        return {-1: bm, 0: b0, 1: bp}

    @staticmethod
    def from_blocks(blocks: dict) -> np.ndarray:
        return np.array([[blocks[0][0, 0], blocks[-1][0, 1]], [blocks[1][1, 0], blocks[0][1, 1]]], dtype=complex)


def rwa_reduce(model: LindbladModel) -> RwaReduction:
    """h_RWA = [[h0_11 + Omega, h[-1]_12], [h[1]_21, h0_22]] for a band-basis two-level model."""
    if model.dim != 2:
        raise DimensionError(f"rotating-wave reduction needs a two-level model, got N={model.dim}")
    if model.max_harmonic > 1:
        raise ConfigurationError("rotating-wave reduction needs a single-harmonic drive")
    h0 = model.h(0)
    if abs(h0[0, 1]) > 1e-12 * max(1.0, np.abs(h0).max()):
        raise ConfigurationError("static Hamiltonian must be diagonal (band basis) for the reduction")
    h = np.array([
        [h0[0, 0] + model.omega, model.h(-1)[0, 1]],
        [model.h(1)[1, 0], h0[1, 1]],
    ], dtype=complex)
    return RwaReduction(h, model.omega)


def compact_residual(model: LindbladModel, lam: complex, blocks: dict) -> float:
    """Residual of the Toeplitz-embedded ("compact") form of the eigenmode equation.

    The operator matrix is built on a window wide enough that every block
    (p, q) with |p|, |q|, |p - q| <= L receives all of its contributions; only
    those blocks are compared.
    """
    cutoff = max(blocks)
    n = model.dim
    lmax = model.max_harmonic
    window = cutoff + lmax
    sf = build_sf_hamiltonian(model, SambeConfig(window))
    size = (2 * window + 1) * n
    rho = np.zeros((size, size), dtype=complex)
    big_l = np.zeros((size, size), dtype=complex)
    for a, p in enumerate(range(-window, window + 1)):
        for b, q in enumerate(range(-window, window + 1)):
            m = blocks.get(p - q)
            if m is not None:
                rho[a * n:(a + 1) * n, b * n:(b + 1) * n] = m
    lhs = -1j * (sf.mat @ rho - rho @ sf.mat)
    for j in model.jumps:
        big_l = np.kron(np.eye(2 * window + 1), j.operator)
        ldl = big_l.conj().T @ big_l
        lhs = lhs + j.rate * (big_l @ rho @ big_l.conj().T - 0.5 * (ldl @ rho + rho @ ldl))
    diff = lhs - lam * rho
    worst = 0.0
    for a, p in enumerate(range(-window, window + 1)):
        for b, q in enumerate(range(-window, window + 1)):
            if abs(p) <= cutoff and abs(q) <= cutoff and abs(p - q) <= cutoff:
                worst = max(worst, float(np.abs(diff[a * n:(a + 1) * n, b * n:(b + 1) * n]).max()))
    return worst


def replica_shift(blocks: dict, shift: int) -> dict:
    """Relabel harmonics r'[l + shift] = r[l] inside the same window.

    Multiplying a periodic mode by exp(-i shift Omega t) moves lam to
    lam + i shift Omega. Blocks pushed past the window are dropped and the
    vacated blocks are zero.
    """
    cutoff = max(blocks)
    zero = np.zeros_like(blocks[0])
    return {l: blocks.get(l - shift, zero) for l in range(-cutoff, cutoff + 1)}


def pack_blocks(blocks: dict) -> np.ndarray:
    """Inverse of the block unpacking used by the extended generator."""
    cutoff = max(blocks)
    return np.concatenate([vectorize(blocks[l]) for l in range(-cutoff, cutoff + 1)])
