"""Time-periodic Lindblad models.

A model is the data of the driven master equation

    d rho/dt = -i[H(t), rho] + sum_mu Gamma_mu (L_mu rho L_mu^+ - 1/2 {L_mu^+ L_mu, rho})

with ``H(t) = sum_l h[l] exp(-i l Omega t)`` (hbar = 1). Jump operators are
static by default; a jump may carry extra harmonics, which the time-domain
propagator honours but the Shirley-Floquet solver rejects.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Mapping

import numpy as np

from .errors import ValidationError

HERMITICITY_TOL = 1e-12


@dataclass(frozen=True)
class Jump:
    operator: np.ndarray
    rate: float
    harmonics: Mapping[int, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "operator", np.asarray(self.operator, dtype=complex))
        object.__setattr__(
            self, "harmonics",
            MappingProxyType({int(l): np.asarray(m, dtype=complex) for l, m in self.harmonics.items() if l != 0}),
        )

    @property
    def is_static(self) -> bool:
        return not self.harmonics

    def operator_at(self, omega: float, t: float) -> np.ndarray:
        op = self.operator
        for l, m in self.harmonics.items():
            op = op + m * np.exp(-1j * l * omega * t)
        return op


@dataclass(frozen=True)
class LindbladModel:
    dim: int
    omega: float
    h_fourier: Mapping[int, np.ndarray]
    jumps: tuple[Jump, ...] = ()

    def __post_init__(self):
        h = {int(l): np.asarray(m, dtype=complex) for l, m in self.h_fourier.items()}
        object.__setattr__(self, "h_fourier", MappingProxyType(dict(sorted(h.items()))))
        jumps = tuple(j if isinstance(j, Jump) else Jump(*j) for j in self.jumps)
        object.__setattr__(self, "jumps", jumps)

    @property
    def period(self) -> float:
        return 2 * math.pi / self.omega

    @property
    def max_harmonic(self) -> int:
        """Largest |l| carrying a non-zero Hamiltonian component."""
        ls = [abs(l) for l, m in self.h_fourier.items() if np.any(m != 0)]
        return max(ls, default=0)

    @property
    def is_static(self) -> bool:
        return self.max_harmonic == 0 and all(j.is_static for j in self.jumps)

    @property
    def is_closed(self) -> bool:
        return all(j.rate == 0 for j in self.jumps)

    def h(self, l: int) -> np.ndarray:
        m = self.h_fourier.get(l)
        return np.zeros((self.dim, self.dim), dtype=complex) if m is None else m


def validate(model: LindbladModel) -> list[str]:
    """Return a list of human-readable invariant violations (empty if valid)."""
    report = []
    n = model.dim
    if not isinstance(n, (int, np.integer)) or n < 1:
        report.append(f"dim must be a positive integer, got {n!r}")
        return report
    if not (np.isfinite(model.omega) and model.omega > 0):
        report.append(f"omega must be positive and finite, got {model.omega!r}")

    for l, m in model.h_fourier.items():
        if m.shape != (n, n):
            report.append(f"h[{l}] has shape {m.shape}, expected {(n, n)}")
        elif not np.all(np.isfinite(m)):
            report.append(f"h[{l}] has non-finite entries")
    if any("h[" in r for r in report):
        return report

    for l, m in model.h_fourier.items():
        partner = model.h_fourier.get(-l)
        if partner is None:
            report.append(f"hermiticity: h[{l}] present without matching h[{-l}]")
            continue
        if l < 0:
            continue
        scale = max(1.0, float(np.abs(m).max(initial=0.0)))
        defect = float(np.abs(partner - m.conj().T).max(initial=0.0))
        if defect > HERMITICITY_TOL * scale:
            report.append(f"hermiticity: h[{-l}] != h[{l}]^dagger (defect {defect:.3e})")

    for i, jump in enumerate(model.jumps):
        if not np.isfinite(jump.rate):
            report.append(f"jump {i}: rate is not finite")
        elif jump.rate < 0:
            report.append(f"jump {i}: negative rate {jump.rate}")
        for label, m in [("operator", jump.operator), *((f"harmonic {l}", m) for l, m in jump.harmonics.items())]:
            if m.shape != (n, n):
                report.append(f"jump {i}: {label} has shape {m.shape}, expected {(n, n)}")
            elif not np.all(np.isfinite(m)):
                report.append(f"jump {i}: {label} has non-finite entries")
    return report


def ensure_valid(model: LindbladModel) -> LindbladModel:
    report = validate(model)
    if report:
        raise ValidationError(report)
    return model


def hamiltonian_at(model: LindbladModel, t: float) -> np.ndarray:
    """H(t) = sum_l h[l] exp(-i l Omega t)."""
    h = np.zeros((model.dim, model.dim), dtype=complex)
    for l, m in model.h_fourier.items():
        h = h + m * np.exp(-1j * l * model.omega * t)
    return h


def physicality_defects(rho) -> tuple[float, float, float]:
    """(Hermiticity defect, |trace - 1|, minimum eigenvalue of the Hermitian part)."""
    rho = np.asarray(rho, dtype=complex)
    herm = float(np.abs(rho - rho.conj().T).max())
    tr = float(abs(np.trace(rho) - 1))
    min_eig = float(np.linalg.eigvalsh((rho + rho.conj().T) / 2).min())
    return herm, tr, min_eig


def is_physical(rho, tol: float = 1e-8) -> bool:
    herm, tr, min_eig = physicality_defects(rho)
    return herm <= tol and tr <= tol and min_eig >= -tol


# Standard two-level operators in the (ground, excited) = (|0>, |1>) ordering.
# ``LOWERING`` takes |1> to |0>; for the two-band model it coincides with the
# Pauli raising matrix [[0, 1], [0, 0]] because the valence band is listed first.
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
SIGMA_PLUS = np.array([[0, 1], [0, 0]], dtype=complex)
SIGMA_MINUS = np.array([[0, 0], [1, 0]], dtype=complex)
LOWERING = SIGMA_PLUS
RAISING = SIGMA_MINUS


def static_model(h0, jumps=(), omega: float = 2 * math.pi) -> LindbladModel:
    """Time-independent model; ``omega`` only fixes the period T = 2 pi / omega."""
    h0 = np.asarray(h0, dtype=complex)
    return LindbladModel(dim=h0.shape[0], omega=omega, h_fourier={0: h0}, jumps=tuple(Jump(op, r) for op, r in jumps))


def amplitude_damping(rate: float = 1.0, period: float = 1.0) -> LindbladModel:
    """H = 0 and a single lowering jump; the steady state is |0><0|."""
    return static_model(np.zeros((2, 2)), [(LOWERING, rate)], omega=2 * math.pi / period)
