"""Seeded random model ensembles and the spectral property suite run on them.

Each check returns the worst observed margin over the ensemble so that a
report can say both whether it passed and by how much.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import EngineError
from .model import Jump, LindbladModel, physicality_defects
from .propagator import PropagatorConfig, floquet_operator
from .spectral import FloquetSpectrum, decompose, extract_ness, nondecaying_projection
from .superop import Superoperator, vectorize


def random_hermitian(rng: np.random.Generator, n: int, scale: float = 1.0) -> np.ndarray:
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return scale * (a + a.conj().T) / 2


def random_matrix(rng: np.random.Generator, n: int, scale: float = 1.0) -> np.ndarray:
    return scale * (rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))) / math.sqrt(2)


def random_density(rng: np.random.Generator, n: int) -> np.ndarray:
    """Full-rank random density matrix G G^+ / Tr(G G^+)."""
    g = random_matrix(rng, n)
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_model(rng: np.random.Generator, *, dim: int | None = None, harmonics: int | None = None,
                 n_jumps: int | None = None, omega: float | None = None, drive: float = 0.5,
                 rate_range: tuple[float, float] = (0.1, 1.0)) -> LindbladModel:
    """Random periodic model with Hermitian Fourier data and nonnegative rates.

    ``harmonics`` is the largest drive harmonic (1 or 2 by default, 0 gives a
    static model); ``n_jumps = 0`` gives a closed model.
    """
    n = dim if dim is not None else int(rng.integers(2, 5))
    lmax = harmonics if harmonics is not None else int(rng.integers(1, 3))
    k = n_jumps if n_jumps is not None else int(rng.integers(1, 4))
    om = omega if omega is not None else float(rng.uniform(1.0, 3.0))
    h = {0: random_hermitian(rng, n)}
    for l in range(1, lmax + 1):
        m = random_matrix(rng, n, drive / l)
        h[l], h[-l] = m, m.conj().T
    jumps = tuple(Jump(random_matrix(rng, n), float(rng.uniform(*rate_range))) for _ in range(k))
    return LindbladModel(n, om, h, jumps)


def default_ensemble(seed: int = 0, size: int = 100, closed: int | None = None) -> list[LindbladModel]:
    """``size`` dissipative models plus ``closed`` (default size // 10) models without jumps."""
    closed = size // 10 if closed is None else closed
    rng = np.random.default_rng(seed)
    models = [random_model(rng, dim=2 + i % 3, harmonics=1 + i % 2, n_jumps=1 + (i // 2) % 3) for i in range(size)]
    models += [random_model(rng, dim=2 + i % 3, harmonics=1 + i % 2, n_jumps=0) for i in range(closed)]
    return models


# ----------------------------------------------------------------------------- individual checks


@dataclass
class CheckResult:
    name: str
    tolerance: float
    worst: float = 0.0
    count: int = 0
    failures: list = field(default_factory=list)

    def record(self, index: int, value: float) -> None:
        self.count += 1
        self.worst = max(self.worst, value)
        if value > self.tolerance or not np.isfinite(value):
            self.failures.append((index, value))

    def fail(self, index: int, message: str) -> None:
        self.count += 1
        self.failures.append((index, message))

    @property
    def passed(self) -> bool:
        return not self.failures


def pairing_defect(spec: FloquetSpectrum, uf: Superoperator) -> float:
    """Conjugation symmetry of the spectrum and of the eigenpairs (q*, rho^+)."""
    q = spec.eigenvalues
    multiset = max(float(np.abs(q - np.conj(z)).min()) for z in q)
    pair = 0.0
    for z, rho in zip(q, spec.eigenoperators):
        v = vectorize(rho.conj().T)
        pair = max(pair, float(np.linalg.norm(uf.mat @ v - np.conj(z) * v)))
    return max(multiset, pair)


def trace_defect(spec: FloquetSpectrum, threshold: float = 1e-8) -> float:
    """Largest |Tr rho_j| among eigenoperators with |q_j - 1| > threshold."""
    mask = np.abs(spec.eigenvalues - 1) > threshold
    traces = np.abs(spec.traces()[mask])
    return float(traces.max()) if traces.size else 0.0


def generalized_trace_defect(spec: FloquetSpectrum, uf: Superoperator) -> float:
    """Largest trace of a unit vector in any generalized eigenspace away from q = 1."""
    worst = 0.0
    steady_tol = spec.tolerances.get("steady_tol", 1e-7)
    ident = vectorize(np.eye(spec.dim_hilbert))
    eye = np.eye(uf.mat.shape[0])
    for c in spec.jordan.clusters:
        if abs(c.center - 1) <= steady_tol:
            continue
        if c.algebraic == 1:
            j = c.indices[0]
            basis = vectorize(spec.eigenoperators[j])[:, None]
        else:
            power = np.linalg.matrix_power(uf.mat - c.center * eye, c.algebraic)
            _, _, vh = np.linalg.svd(power)
            basis = vh[-c.algebraic:].conj().T
        worst = max(worst, float(np.abs(ident.conj() @ basis).max()))
    return worst


def convergence_residual(spec: FloquetSpectrum, uf: Superoperator, ness, rng: np.random.Generator,
                         n_states: int = 10, target: float = 1e-8) -> tuple[float, int]:
    """Distance between U_F^m rho and its non-decaying projection after m periods.

    m is the smallest integer with |q_2|^m <= target, q_2 the largest
    transient eigenvalue.
    """
    q2 = spec.max_transient_modulus()
    m = 1 if q2 == 0 else max(1, math.ceil(math.log(target) / math.log(q2)))
    um = np.linalg.matrix_power(uf.mat, m)
    n = spec.dim_hilbert
    worst = 0.0
    for _ in range(n_states):
        rho = random_density(rng, n)
        proj = nondecaying_projection(spec, uf, rho, ness=ness)
        evolved = um @ vectorize(rho)
        worst = max(worst, float(np.linalg.norm(evolved - vectorize(proj.evolved(m)))))
    return worst, m


# ----------------------------------------------------------------------------- the suite


@dataclass
class SuiteReport:
    checks: list[CheckResult]
    size: int

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def lines(self) -> list[str]:
        out = []
        for c in self.checks:
            status = "PASS" if c.passed else "FAIL"
            out.append(f"{status}  {c.name}: models={c.count} worst={c.worst:.3e} tol={c.tolerance:.1e}"
                       + (f" failures={len(c.failures)} first={c.failures[0]}" if c.failures else ""))
        return out


UfHook = Callable[[LindbladModel, Superoperator], Superoperator]


def run_theorem_suite(models: list[LindbladModel], cfg: PropagatorConfig | None = None, *,
                      uf_hook: UfHook | None = None, seed: int = 0, n_states: int = 10) -> SuiteReport:
    """Run every spectral property check on each model.

    ``uf_hook`` may replace U_F before analysis; it exists so that a
    deliberately non-CPTP map can be fed through as a negative control.
    """
    cfg = cfg or PropagatorConfig()
    rng = np.random.default_rng(seed)
    pairing = CheckResult("conjugate pairing of eigenpairs", 1e-8)
    traceless = CheckResult("tracelessness of non-unit eigenoperators", 1e-8)
    modulus = CheckResult("eigenvalue modulus bound (max |q| - 1)", 1e-8)
    gen_trace = CheckResult("tracelessness of deficient generalized eigenspaces", 1e-8)
    existence = CheckResult("unit eigenvalue exists (min |q - 1|)", 1e-7)
    steady_diag = CheckResult("steady cluster diagonalizable (deficiency)", 0.0)
    circle_diag = CheckResult("unit-circle clusters diagonalizable (deficiency)", 0.0)
    ness_single = CheckResult("non-degenerate steady state physical (worst defect)", 1e-8)
    ness_any = CheckResult("physical steady state extracted (fixed-point residual)", 1e-7)
    converge = CheckResult("stroboscopic approach to non-decaying projection", 1e-6)
    checks = [pairing, traceless, modulus, gen_trace, existence, steady_diag, circle_diag, ness_single, ness_any,
              converge]

    for i, model in enumerate(models):
        uf = floquet_operator(model, cfg)
        if uf_hook is not None:
            uf = uf_hook(model, uf)
        spec = decompose(uf, model.period, strict=False)
        q = spec.eigenvalues
        pairing.record(i, pairing_defect(spec, uf))
        traceless.record(i, trace_defect(spec))
        modulus.record(i, float(np.abs(q).max() - 1))
        gen_trace.record(i, generalized_trace_defect(spec, uf))
        existence.record(i, float(np.abs(q - 1).min()))
        steady = [c for c in spec.jordan.clusters if abs(c.center - 1) <= spec.tolerances["steady_tol"]]
        steady_diag.record(i, float(max((c.deficiency for c in steady), default=0)))
        circle_diag.record(i, float(max((c.deficiency for c in spec.jordan.clusters if c.on_unit_circle), default=0)))
        try:
            ness = extract_ness(spec, uf, model, cfg)
        except EngineError as exc:
            ness_any.fail(i, f"{type(exc).__name__}: {exc}")
            converge.fail(i, "no steady state")
            continue
        herm, tr, min_eig = physicality_defects(ness.rho0)
        periodic = float(np.abs(ness.trajectory[-1] - ness.trajectory[0]).max()) if ness.trajectory else 0.0
        defect = max(herm * 100, tr * 100, -min_eig, periodic)  # 1e-10 tolerances scaled onto 1e-8
        if ness.steady_dim == 1:
            ness_single.record(i, defect)
        ness_any.record(i, ness.fixed_point_residual if defect <= 1e-8 else math.inf)
        try:
            res, _ = convergence_residual(spec, uf, ness, rng, n_states)
        except (EngineError, np.linalg.LinAlgError) as exc:
            converge.fail(i, f"{type(exc).__name__}: {exc}")
            continue
        converge.record(i, res)
    return SuiteReport(checks, len(models))
