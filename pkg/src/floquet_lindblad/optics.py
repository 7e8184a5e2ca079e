"""Steady-state optical response of a driven, bath-coupled two-band insulator.

Each momentum k is an independent two-level system in the band basis
(valence = index 0, conduction = index 1), driven through
``H(t) = H0 + A(t) V0`` with ``A(t) = i A exp(-i Omega t) - i A* exp(i Omega t)``.
Keeping the resonant 2x2 block of the extended Hamiltonian gives the static
rotating-frame problem

    h_RWA = [[eps1 + Omega, -i A* v12], [i A v21, eps2]] = eps I + d . sigma

with emission jump sigma_+ (rate gamma0 (N + 1)) and absorption jump sigma_-
(rate gamma0 N). Its steady Bloch vector solves a 3x3 linear system.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateSteadyStateError, DomainError, ValidationError
from .io import ParseError, decode_complex, decode_matrix, read_json
from .model import SIGMA_MINUS, SIGMA_PLUS, SIGMA_X, SIGMA_Y, SIGMA_Z, Jump, LindbladModel, static_model

PAULI = np.stack([SIGMA_X, SIGMA_Y, SIGMA_Z])
HERMITICITY_TOL = 1e-10


@dataclass(frozen=True)
class TwoBandModel:
    k: np.ndarray
    eps1: np.ndarray
    eps2: np.ndarray
    v0: np.ndarray  # (n, 2, 2)
    dv_dk: np.ndarray  # (n, 2, 2)
    amplitude: complex
    omega: float
    gamma0: float
    beta: float = math.inf
    weights: np.ndarray | None = None
    strong_field: bool = False  # reserved: higher-order field couplings are not implemented

    def __post_init__(self):
        for name in ("k", "eps1", "eps2"):
            object.__setattr__(self, name, np.atleast_1d(np.asarray(getattr(self, name), dtype=float)))
        for name in ("v0", "dv_dk"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=complex).reshape(-1, 2, 2))
        n = self.k.size
        w = np.full(n, 1.0 / n) if self.weights is None else np.asarray(self.weights, dtype=float)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "amplitude", complex(self.amplitude))
        report = two_band_defects(self)
        if report:
            raise ValidationError(report)

    @property
    def size(self) -> int:
        return self.k.size


def two_band_defects(model: TwoBandModel) -> list[str]:
    report = []
    n = model.k.size
    if n == 0:
        report.append("k grid is empty")
    for name in ("eps1", "eps2", "weights"):
        if getattr(model, name).shape != (n,):
            report.append(f"{name} must have one entry per k point")
    for name in ("v0", "dv_dk"):
        if getattr(model, name).shape != (n, 2, 2):
            report.append(f"{name} must hold one 2x2 matrix per k point")
    if report:
        return report
    gap = model.eps2 - model.eps1
    if np.any(gap <= 0):
        report.append(f"band gap must be positive; first failure at k index {int(np.argmax(gap <= 0))}")
    herm = np.abs(model.v0 - model.v0.conj().transpose(0, 2, 1)).max(axis=(1, 2))
    if np.any(herm > HERMITICITY_TOL):
        report.append(f"v0 is not Hermitian at k index {int(np.argmax(herm > HERMITICITY_TOL))}")
    if not (model.omega > 0 and np.isfinite(model.omega)):
        report.append("omega must be positive and finite")
    if not (model.gamma0 > 0 and np.isfinite(model.gamma0)):
        report.append("gamma0 must be positive and finite")
    if not model.beta > 0:
        report.append("beta must be positive (math.inf for zero temperature)")
    if model.strong_field:
        report.append("strong_field couplings are reserved and not implemented")
    return report


def vector_potential(amplitude: complex, omega: float, t: float) -> float:
    """A(t) = i A exp(-i Omega t) - i A* exp(i Omega t), a real scalar."""
    z = 1j * amplitude * np.exp(-1j * omega * t)
    return float(2 * z.real)


def planck_occupation(beta: float, energy_gap: float) -> float:
    """Bose occupation 1 / (exp(beta * gap) - 1); zero at infinite beta."""
    if not energy_gap > 0:
        raise DomainError(f"energy gap must be positive, got {energy_gap}")
    if not beta > 0:
        raise DomainError(f"beta must be positive, got {beta}")
    if math.isinf(beta):
        return 0.0
    x = beta * energy_gap
    if x < 1e-12:
        raise DomainError(f"beta * gap = {x:.3e} is below 1e-12; occupation diverges")
    return math.exp(-x) / -math.expm1(-x)  # 1 / (e^x - 1) without overflow


@dataclass(frozen=True)
class RwaBlochData:
    epsilon: float
    d: np.ndarray
    gamma1: float
    gamma2: float

    def __post_init__(self):
        object.__setattr__(self, "d", np.asarray(self.d, dtype=float))
        if not (self.gamma1 >= self.gamma2 >= 0):
            raise DomainError(f"rates must satisfy gamma1 >= gamma2 >= 0, got {self.gamma1}, {self.gamma2}")

    @property
    def gamma(self) -> float:
        return self.gamma1 + self.gamma2

    @property
    def gamma0_eff(self) -> float:
        return self.gamma1 - self.gamma2

    def hamiltonian(self) -> np.ndarray:
        return self.epsilon * np.eye(2) + np.einsum("i,ijk->jk", self.d, PAULI)


def rwa_bloch_data(model: TwoBandModel, i: int) -> RwaBlochData:
    """Rotating-frame parameters at k index ``i``."""
    e1, e2 = model.eps1[i], model.eps2[i]
    occ = planck_occupation(model.beta, e2 - e1)
    off = -1j * np.conj(model.amplitude) * model.v0[i, 0, 1]  # = d_x - i d_y
    d = np.array([off.real, -off.imag, (e1 + model.omega - e2) / 2])
    return RwaBlochData((e1 + model.omega + e2) / 2, d, model.gamma0 * (occ + 1), model.gamma0 * occ)


def bloch_matrix(data: RwaBlochData) -> tuple[np.ndarray, np.ndarray]:
    """(G, b) of the Bloch equation d<sigma>/dt = G <sigma> + b."""
    dx, dy, dz = data.d
    g, g0 = data.gamma, data.gamma0_eff
    mat = np.array([
        [-g / 2, -2 * dz, 2 * dy],
        [2 * dz, -g / 2, -2 * dx],
        [-2 * dy, 2 * dx, -g],
    ])
    return mat, np.array([0.0, 0.0, g0])


def solve_rwa_steady(data: RwaBlochData) -> np.ndarray:
    """Steady Bloch vector -G^{-1} b."""
    if data.gamma <= 0:
        raise DegenerateSteadyStateError(
            "gamma = 0 leaves the Bloch matrix singular; use the general spectral solver for the closed problem"
        )
    mat, b = bloch_matrix(data)
    return -np.linalg.solve(mat, b)


def bloch_to_density(s) -> np.ndarray:
    """rho = (I + s . sigma) / 2."""
    return 0.5 * (np.eye(2) + np.einsum("i,ijk->jk", np.asarray(s, dtype=float), PAULI))


def velocity_rwa_matrix(model: TwoBandModel, i: int) -> np.ndarray:
    a, dv, v = model.amplitude, model.dv_dk[i], model.v0[i]
    mat = np.array([[v[0, 0], -1j * np.conj(a) * dv[0, 1]], [1j * a * dv[1, 0], v[1, 1]]])
    if np.abs(mat - mat.conj().T).max() > HERMITICITY_TOL:
        raise ValidationError([f"rotating-frame velocity block is not Hermitian at k index {i}"])
    return mat


def velocity_rwa_block(model: TwoBandModel, i: int) -> tuple[float, np.ndarray]:
    """(b0, b) with v_RWA = b0 I + b . sigma."""
    mat = velocity_rwa_matrix(model, i)
    b0 = float((mat[0, 0] + mat[1, 1]).real / 2)
    off = mat[0, 1]  # = b_x - i b_y
    return b0, np.array([off.real, -off.imag, float((mat[0, 0] - mat[1, 1]).real / 2)])


def j_dc(model: TwoBandModel, i: int) -> float:
    """DC (shift) current b0 + b . <sigma> at k index ``i``."""
    b0, b = velocity_rwa_block(model, i)
    return float(b0 + b @ solve_rwa_steady(rwa_bloch_data(model, i)))


def j_shg(model: TwoBandModel, i: int) -> complex:
    """Amplitude c of c exp(-2i Omega t) in the current; the signal is c e^{-2i Omega t} + c.c."""
    s = solve_rwa_steady(rwa_bloch_data(model, i))
    rho21 = 0.5 * (s[0] + 1j * s[1])
    return complex(1j * model.amplitude * model.dv_dk[i, 0, 1] * rho21)


@dataclass(frozen=True)
class OpticalResponse:
    k: np.ndarray
    sigma_ss: np.ndarray  # (n, 3)
    j_dc: np.ndarray
    j_shg: np.ndarray
    total_dc: float
    total_shg: complex
    beta: float = math.inf
    notes: tuple[str, ...] = field(default_factory=tuple)


def _thread_count() -> int:
    raw = os.environ.get("ENGINE_THREADS", "0").strip() or "0"
    try:
        n = int(raw)
    except ValueError:
        n = 0
    return n if n > 0 else (os.cpu_count() or 1)


def _point(model: TwoBandModel, i: int) -> tuple[np.ndarray, float, complex]:
    try:
        s = solve_rwa_steady(rwa_bloch_data(model, i))
        b0, b = velocity_rwa_block(model, i)
    except ValidationError as exc:
        raise ValidationError([f"k index {i} (k={model.k[i]:.17g}): {line}" for line in exc.report]) from exc
    except (DegenerateSteadyStateError, DomainError, np.linalg.LinAlgError) as exc:
        raise type(exc)(f"k index {i} (k={model.k[i]:.17g}): {exc}") from exc
    rho21 = 0.5 * (s[0] + 1j * s[1])
    return s, float(b0 + b @ s), complex(1j * model.amplitude * model.dv_dk[i, 0, 1] * rho21)


def sweep(model: TwoBandModel, threads: int | None = None) -> OpticalResponse:
    """Per-k steady Bloch vectors and currents plus weighted grid totals."""
    n = model.size
    threads = threads or _thread_count()
    if threads > 1 and n > 1:
        with ThreadPoolExecutor(max_workers=min(threads, n)) as pool:
            results = list(pool.map(lambda i: _point(model, i), range(n)))
    else:
        results = [_point(model, i) for i in range(n)]
    sig = np.array([r[0] for r in results]).reshape(n, 3)
    dc = np.array([r[1] for r in results])
    shg = np.array([r[2] for r in results])
    return OpticalResponse(
        model.k, sig, dc, shg,
        float(np.sum(model.weights * dc)), complex(np.sum(model.weights * shg)), model.beta,
    )


# ----------------------------------------------------------------------------- model builders


def effective_model(data: RwaBlochData, omega: float = 2 * math.pi) -> LindbladModel:
    """Static rotating-frame model eps I + d . sigma with sigma_+ / sigma_- jumps."""
    return static_model(data.hamiltonian(), [(SIGMA_PLUS, data.gamma1), (SIGMA_MINUS, data.gamma2)], omega)


def _rates(model: TwoBandModel, i: int) -> tuple[float, float]:
    occ = planck_occupation(model.beta, model.eps2[i] - model.eps1[i])
    return model.gamma0 * (occ + 1), model.gamma0 * occ


def lab_rwa_model(model: TwoBandModel, i: int) -> LindbladModel:
    """Lab-frame model keeping only the resonant drive terms.

    Its exact steady state is the rotating-frame one with the coherences
    carrying exp(+-i Omega t).
    """
    a, v = model.amplitude, model.v0[i]
    g1, g2 = _rates(model, i)
    h1 = np.array([[0, 0], [1j * a * v[1, 0], 0]])
    return LindbladModel(
        2, model.omega,
        {0: np.diag([model.eps1[i], model.eps2[i]]), 1: h1, -1: h1.conj().T},
        (Jump(SIGMA_PLUS, g1), Jump(SIGMA_MINUS, g2)),
    )


def lab_model(model: TwoBandModel, i: int) -> LindbladModel:
    """Full linear coupling H0 + A(t) v0 at k index ``i``, without the rotating-wave cut."""
    a, v = model.amplitude, model.v0[i]
    g1, g2 = _rates(model, i)
    return LindbladModel(
        2, model.omega,
        {0: np.diag([model.eps1[i], model.eps2[i]]), 1: 1j * a * v, -1: -1j * np.conj(a) * v},
        (Jump(SIGMA_PLUS, g1), Jump(SIGMA_MINUS, g2)),
    )


def tabulate_two_band(h, dh, d2h, ks, *, amplitude, omega, gamma0, beta=math.inf, weights=None) -> TwoBandModel:
    """Band-basis tables from a Bloch Hamiltonian h(k) and its first two k-derivatives.

    v0 = U^+ h'(k) U and dv_dk = U^+ h''(k) U with U the eigenvectors of h(k)
    (valence band first).
    """
    ks = np.asarray(ks, dtype=float)
    e1, e2, v0, dv = [], [], [], []
    for k in ks:
        w, u = np.linalg.eigh(np.asarray(h(k), dtype=complex))
        e1.append(w[0])
        e2.append(w[1])
        v0.append(u.conj().T @ np.asarray(dh(k), dtype=complex) @ u)
        dv.append(u.conj().T @ np.asarray(d2h(k), dtype=complex) @ u)
    return TwoBandModel(ks, np.array(e1), np.array(e2), np.array(v0), np.array(dv), amplitude, omega, gamma0, beta,
                        weights)


def rice_mele(n_k: int, *, t1=1.0, t2=0.6, delta=0.4, amplitude=0.02, omega=2.5, gamma0=0.05,
              beta=math.inf) -> TwoBandModel:
    """Rice-Mele chain h(k) = (t1 + t2 cos k) sx + t2 sin k sy + delta sz on a uniform k grid.

    Broken inversion symmetry makes the DC current finite.
    """
    ks = -math.pi + 2 * math.pi * np.arange(n_k) / n_k

    def h(k):
        return (t1 + t2 * np.cos(k)) * SIGMA_X + t2 * np.sin(k) * SIGMA_Y + delta * SIGMA_Z

    def dh(k):
        return -t2 * np.sin(k) * SIGMA_X + t2 * np.cos(k) * SIGMA_Y

    def d2h(k):
        return -t2 * np.cos(k) * SIGMA_X - t2 * np.sin(k) * SIGMA_Y

    return tabulate_two_band(h, dh, d2h, ks, amplitude=amplitude, omega=omega, gamma0=gamma0, beta=beta)


def inversion_symmetric(n_k: int, *, gap=1.0, hop=0.5, amplitude=0.05, omega=1.8, gamma0=0.1,
                        beta=math.inf) -> TwoBandModel:
    """Diagonal bands eps_{1,2}(k) = -/+ (gap/2 + hop (1 - cos k)) with odd v0 and even dv_dk.

    The interband velocity ``hop * sin k`` is odd in k, so contributions from
    k and -k cancel in the DC current.
    """
    ks = -math.pi + 2 * math.pi * (np.arange(n_k) + 0.5) / n_k
    band = gap / 2 + hop * (1 - np.cos(ks))
    slope = hop * np.sin(ks)
    curve = hop * np.cos(ks)
    v0 = np.stack([np.array([[-s, s], [s, s]], dtype=complex) for s in slope])
    dv = np.stack([np.array([[-c, c], [c, c]], dtype=complex) for c in curve])
    return TwoBandModel(ks, -band, band, v0, dv, amplitude, omega, gamma0, beta)


# ----------------------------------------------------------------------------- band files


BAND_KEYS = ("k", "eps1", "eps2", "v0", "dv_dk", "amplitude", "omega", "gamma0")


def band_model_from_dict(doc: dict) -> tuple[TwoBandModel, bool]:
    """Decode a band document; the flag reports whether beta defaulted to infinity."""
    missing = [key for key in BAND_KEYS if key not in doc]
    if missing:
        raise ParseError(f"band document lacks {', '.join(missing)}")
    try:
        raw_beta = doc.get("beta")
        defaulted = raw_beta is None
        beta = math.inf if defaulted or raw_beta in ("inf", "infinity") else float(raw_beta)
        v0 = np.array([decode_matrix(m) for m in doc["v0"]])
        dv = np.array([decode_matrix(m) for m in doc["dv_dk"]])
        model = TwoBandModel(
            np.asarray(doc["k"], dtype=float), np.asarray(doc["eps1"], dtype=float),
            np.asarray(doc["eps2"], dtype=float), v0, dv, decode_complex(doc["amplitude"]),
            float(doc["omega"]), float(doc["gamma0"]), beta,
            None if doc.get("weights") is None else np.asarray(doc["weights"], dtype=float),
        )
    except ParseError:
        raise
    except (TypeError, ValueError, KeyError) as exc:
        if isinstance(exc, ValidationError):
            raise
        raise ParseError(f"malformed band document: {exc!r}") from exc
    return model, defaulted


def load_band_model(path) -> tuple[TwoBandModel, bool]:
    return band_model_from_dict(read_json(path))
