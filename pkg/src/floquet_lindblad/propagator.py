"""Time-ordered evolution superoperators for periodic Lindblad models.

The interval is cut into uniform slices and each slice contributes the exact
exponential of the generator frozen at the slice midpoint (second order) or
left endpoint (first order). Every factor is itself a Lindblad semigroup
element, so the product is CPTP by construction.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np
import scipy.linalg

from .errors import ConfigurationError, DomainError
from .model import LindbladModel, ensure_valid
from .superop import (
    Superoperator,
    commutator_superop,
    devectorize,
    liouvillian_matrix,
    static_dissipator,
    vectorize,
)

Scheme = Literal["midpoint", "endpoint"]


@dataclass(frozen=True)
class PropagatorConfig:
    slices_per_period: int = 512
    scheme: Scheme = "midpoint"
    t0: float = 0.0

    def __post_init__(self):
        if int(self.slices_per_period) != self.slices_per_period or self.slices_per_period < 1:
            raise ConfigurationError(f"slices_per_period must be a positive integer, got {self.slices_per_period}")
        if self.scheme not in ("midpoint", "endpoint"):
            raise ConfigurationError(f"unknown scheme {self.scheme!r}")


def stroboscopic_split(t0: float, period: float, t: float) -> tuple[int, float]:
    """Write ``t - t0 = m * period + tau`` with integer m >= 0 and tau in [0, period)."""
    if t < t0:
        raise DomainError(f"t={t} precedes t0={t0}")
    if not period > 0:
        raise DomainError("period must be positive")
    s = t - t0
    m = math.floor(s / period)
    tau = s - m * period
    if tau >= period or period - tau <= 1e-12 * period:
        m, tau = m + 1, 0.0
    elif tau < 0:
        m, tau = m - 1, tau + period
    if abs(tau) <= 1e-12 * period:
        tau = 0.0
    return m, tau


def _n_slices(model: LindbladModel, cfg: PropagatorConfig, span: float) -> int:
    if span <= 0:
        return 0
    x = span * cfg.slices_per_period / model.period
    return max(1, math.ceil(x - 1e-9))


def _generators(model: LindbladModel, times: np.ndarray) -> np.ndarray:
    """Stack of generator matrices L(t) for every t in ``times``."""
    if not all(j.is_static for j in model.jumps):
        return np.stack([
            liouvillian_matrix(
                sum(m * np.exp(-1j * l * model.omega * t) for l, m in model.h_fourier.items()),
                [(j.operator_at(model.omega, t), j.rate) for j in model.jumps],
            )
            for t in times
        ])
    ls = list(model.h_fourier)
    comms = np.stack([commutator_superop(model.h_fourier[l]) for l in ls])
    phases = np.exp(-1j * np.outer(times, np.array(ls)) * model.omega)
    return np.einsum("tl,lij->tij", phases, comms) + static_dissipator(model)


def slice_factors(model: LindbladModel, cfg: PropagatorConfig, t0: float, t: float) -> tuple[np.ndarray, np.ndarray]:
    """Slice boundaries and per-slice exponentials covering [t0, t].

    Returns ``(edges, factors)``: ``edges`` has n+1 entries and ``factors[k]``
    maps the state at ``edges[k]`` to the state at ``edges[k+1]``.
    """
    if t < t0:
        raise DomainError(f"t={t} precedes t0={t0}")
    n = _n_slices(model, cfg, t - t0)
    edges = np.linspace(t0, t, n + 1)
    if n == 0:
        return edges, np.zeros((0, model.dim**2, model.dim**2), dtype=complex)
    h = (t - t0) / n
    frozen = edges[:-1] + (0.5 * h if cfg.scheme == "midpoint" else 0.0)
    gens = _generators(model, frozen)
    return edges, scipy.linalg.expm(gens * h)


def propagate(model: LindbladModel, cfg: PropagatorConfig, t0: float, t: float, *, check: bool = True) -> Superoperator:
    """U(t, t0) as an N^2 x N^2 map."""
    if check:
        ensure_valid(model)
    if t < t0:
        raise DomainError(f"t={t} precedes t0={t0}")
    n2 = model.dim**2
    if t == t0:
        return Superoperator(model.dim, np.eye(n2, dtype=complex), "map")
    if model.is_static:
        gen = _generators(model, np.array([t0]))[0]
        return Superoperator(model.dim, scipy.linalg.expm(gen * (t - t0)), "map")
    _, factors = slice_factors(model, cfg, t0, t)
    u = np.eye(n2, dtype=complex)
    for f in factors:
        u = f @ u
    return Superoperator(model.dim, u, "map")


def floquet_operator(model: LindbladModel, cfg: PropagatorConfig | None = None) -> Superoperator:
    """U_F = U(t0 + T, t0) with t0 taken from the config."""
    cfg = cfg or PropagatorConfig()
    return propagate(model, cfg, cfg.t0, cfg.t0 + model.period)


def period_path(model: LindbladModel, cfg: PropagatorConfig, samples: int = 64) -> tuple[np.ndarray, list[np.ndarray]]:
    """Maps U(t_i, t0) at ``samples + 1`` times spanning one period (both ends included).

    Sample times sit on slice boundaries, so the last map is exactly the U_F
    returned by :func:`floquet_operator` for driven models.
    """
    ensure_valid(model)
    t0, period = cfg.t0, model.period
    n2 = model.dim**2
    if model.is_static:
        times = t0 + np.linspace(0.0, period, samples + 1)
        gen = _generators(model, np.array([t0]))[0]
        return times, [scipy.linalg.expm(gen * (s - t0)) for s in times]
    edges, factors = slice_factors(model, cfg, t0, t0 + period)
    n = len(factors)
    marks = sorted(set(np.round(np.linspace(0, n, min(samples, n) + 1)).astype(int)))
    maps, u, k = [], np.eye(n2, dtype=complex), 0
    for i in range(n + 1):
        if k < len(marks) and marks[k] == i:
            maps.append(u.copy())
            k += 1
        if i < n:
            u = factors[i] @ u
    return edges[marks], maps


def evolve(model: LindbladModel, cfg: PropagatorConfig, rho, t: float, uf: Superoperator | None = None) -> np.ndarray:
    """rho(t) = U(t0 + tau, t0) U_F^m rho(t0), using ``t - t0 = mT + tau``."""
    uf = uf or floquet_operator(model, cfg)
    m, tau = stroboscopic_split(cfg.t0, model.period, t)
    v = np.linalg.matrix_power(uf.mat, m) @ vectorize(rho)
    if tau:
        v = propagate(model, cfg, cfg.t0, cfg.t0 + tau).mat @ v
    return devectorize(v, model.dim)


def richardson_check(model: LindbladModel, cfg: PropagatorConfig, t0: float, t: float) -> float:
    """Operator 2-norm of U computed with the configured slicing minus U with doubled slicing."""
    coarse = propagate(model, cfg, t0, t)
    fine_cfg = PropagatorConfig(2 * cfg.slices_per_period, cfg.scheme, cfg.t0)
    fine = propagate(model, fine_cfg, t0, t)
    return float(np.linalg.norm(coarse.mat - fine.mat, 2))


def unitary_floquet(model: LindbladModel, cfg: PropagatorConfig | None = None) -> np.ndarray:
    """Hilbert-space one-period propagator of the coherent part, ignoring all jumps."""
    cfg = cfg or PropagatorConfig()
    ensure_valid(model)
    period = model.period
    if model.max_harmonic == 0:
        return scipy.linalg.expm(-1j * model.h(0) * period)
    n = cfg.slices_per_period
    h = period / n
    frozen = cfg.t0 + h * (np.arange(n) + (0.5 if cfg.scheme == "midpoint" else 0.0))
    ls = np.array(list(model.h_fourier))
    hs = np.stack([model.h_fourier[l] for l in ls])
    ham = np.einsum("tl,lij->tij", np.exp(-1j * np.outer(frozen, ls) * model.omega), hs)
    steps = scipy.linalg.expm(-1j * h * ham)
    u = np.eye(model.dim, dtype=complex)
    for s in steps:
        u = s @ u
    return u
