"""Spectrum of the one-period evolution map and certified steady states.

Eigenvalues ``q_j = exp(lambda_j T)`` of U_F are classified as

* ``steady``        |q - 1| <= steady_tol
* ``non_decaying``  ||q| - 1| <= eps_mod (and not steady)
* ``transient``     everything else

Eigenvalues closer than ``cluster_tol`` are grouped and each group's
geometric multiplicity is measured as a numerical null-space dimension, which
exposes Jordan structure. CPTP maps can be defective only strictly inside the
unit disc; a defective cluster on the unit circle is reported as an
integrity failure.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import ContractError, ExtractionError, IntegrityError
from .linalg import eig_general, singular_values
from .model import LindbladModel
from .propagator import PropagatorConfig, floquet_operator, period_path
from .superop import Superoperator, devectorize, vectorize

EPS_MOD = 1e-8
STEADY_TOL = 1e-7
CLUSTER_TOL = 1e-6
RANK_TOL = 1e-9

STEADY, NON_DECAYING, TRANSIENT = "steady", "non_decaying", "transient"


@dataclass(frozen=True)
class Cluster:
    id: int
    indices: tuple[int, ...]
    center: complex
    algebraic: int
    geometric: int
    on_unit_circle: bool

    @property
    def deficiency(self) -> int:
        return self.algebraic - self.geometric


@dataclass(frozen=True)
class JordanReport:
    clusters: tuple[Cluster, ...]

    @property
    def deficient(self) -> tuple[Cluster, ...]:
        return tuple(c for c in self.clusters if c.deficiency > 0)

    def unit_circle_violations(self) -> tuple[Cluster, ...]:
        return tuple(c for c in self.deficient if c.on_unit_circle)


@dataclass(frozen=True)
class FloquetSpectrum:
    eigenvalues: np.ndarray
    eigenoperators: np.ndarray  # (n, N, N), unit Frobenius norm
    left: np.ndarray  # rows: left eigenvectors, biorthogonal to vec(eigenoperators)
    classes: tuple[str, ...]
    jordan: JordanReport
    cluster_of: np.ndarray
    period: float | None = None
    tolerances: dict = field(default_factory=dict)

    @property
    def dim_hilbert(self) -> int:
        return self.eigenoperators.shape[1]

    def indices(self, *classes: str) -> np.ndarray:
        return np.array([i for i, c in enumerate(self.classes) if c in classes], dtype=int)

    @property
    def steady_indices(self) -> np.ndarray:
        return self.indices(STEADY)

    @property
    def nondecaying_indices(self) -> np.ndarray:
        return self.indices(STEADY, NON_DECAYING)

    def max_transient_modulus(self) -> float:
        idx = self.indices(TRANSIENT)
        return float(np.abs(self.eigenvalues[idx]).max()) if idx.size else 0.0

    def lambdas(self) -> np.ndarray:
        """lambda_j = log(q_j) / T with Im lambda_j in [0, 2 pi / T)."""
        if self.period is None:
            raise ContractError("spectrum was decomposed without a period")
        return floquet_exponent(self.eigenvalues, self.period)

    def traces(self) -> np.ndarray:
        return np.trace(self.eigenoperators, axis1=1, axis2=2)


def floquet_exponent(q, period: float):
    q = np.asarray(q, dtype=complex)
    with np.errstate(divide="ignore"):
        re = np.log(np.abs(q))
    im = np.mod(np.angle(q), 2 * math.pi)
    im = np.where(im >= 2 * math.pi, 0.0, im)
    return (re + 1j * im) / period


def phase_factor(op: np.ndarray) -> complex:
    """Scalar c such that ``c * op`` has unit Frobenius norm and a reproducible phase.

    The largest diagonal entry is rotated to be real and non-negative. When
    the diagonal vanishes, the phase is chosen so the operator is as close to
    Hermitian as possible, with the sign fixed by its largest entry.
    """
    op = np.asarray(op, dtype=complex)
    c = 1.0 / np.linalg.norm(op)
    unit = c * op
    diag = np.diag(unit)
    k = int(np.argmax(np.abs(diag)))
    if abs(diag[k]) > 1e-6:
        return c * abs(diag[k]) / diag[k]
    overlap = np.trace(unit @ unit)  # equals e^{-2i phi} |H|^2 when unit = e^{-i phi} H
    if abs(overlap) > 1e-12:
        c = c * np.exp(-0.5j * np.angle(overlap))
    flat = vectorize(c * op)
    cutoff = 0.5 * np.abs(flat).max()
    lead = next(z for z in flat if abs(z) >= cutoff)
    if abs(overlap) > 1e-12:
        return c if lead.real >= 0 else -c
    return c * abs(lead) / lead


def fix_phase(op: np.ndarray) -> np.ndarray:
    return phase_factor(op) * np.asarray(op, dtype=complex)


def _clusters(values: np.ndarray, tol: float) -> list[list[int]]:
    n = len(values)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if abs(values[i] - values[j]) <= tol:
                parent[find(i)] = find(j)
    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    return sorted(groups.values(), key=lambda g: g[0])


def _jordan_report(mat: np.ndarray, eigenvalues: np.ndarray, cluster_tol: float, rank_tol: float,
                   eps_mod: float) -> tuple[JordanReport, np.ndarray]:
    sigma_max = float(singular_values(mat)[0]) if mat.size else 0.0
    clusters, cluster_of = [], np.zeros(len(eigenvalues), dtype=int)
    eye = np.eye(mat.shape[0])
    for cid, group in enumerate(_clusters(eigenvalues, cluster_tol)):
        vals = eigenvalues[group]
        center = complex(vals.mean())
        alg = len(group)
        if alg == 1:
            geo = 1
        else:
            spread = float(np.abs(vals - center).max())
            s = singular_values(mat - center * eye)
            threshold = max(rank_tol * max(sigma_max, 1.0), 2 * spread)
            geo = min(alg, max(1, int(np.sum(s <= threshold))))
        on_circle = abs(abs(center) - 1) <= max(eps_mod, cluster_tol)
        clusters.append(Cluster(cid, tuple(group), center, alg, geo, on_circle))
        cluster_of[group] = cid
    return JordanReport(tuple(clusters)), cluster_of


def detect_jordan(uf: Superoperator | np.ndarray, cluster_tol: float = CLUSTER_TOL, rank_tol: float = RANK_TOL,
                  *, eps_mod: float = EPS_MOD, strict: bool = True) -> JordanReport:
    """Algebraic versus geometric multiplicity of every eigenvalue cluster.

    With ``strict`` a deficient cluster on the unit circle raises
    IntegrityError, since CPTP evolution maps cannot have one.
    """
    if not cluster_tol > 0:
        raise ValueError("cluster_tol must be positive")
    mat = uf.mat if isinstance(uf, Superoperator) else np.asarray(uf, dtype=complex)
    eigenvalues = eig_general(mat).eigenvalues
    report, _ = _jordan_report(mat, eigenvalues, cluster_tol, rank_tol, eps_mod)
    if strict:
        _raise_on_unit_circle_defect(report)
    return report


def _raise_on_unit_circle_defect(report: JordanReport) -> None:
    bad = report.unit_circle_violations()
    if bad:
        c = bad[0]
        raise IntegrityError(
            f"cluster {c.id} at q={c.center:.6g} on the unit circle is defective "
            f"(algebraic {c.algebraic}, geometric {c.geometric}); input is not a CPTP map or is numerically corrupted"
        )


def decompose(uf: Superoperator, period: float | None = None, *, eps_mod: float = EPS_MOD,
              steady_tol: float = STEADY_TOL, cluster_tol: float = CLUSTER_TOL, rank_tol: float = RANK_TOL,
              strict: bool = True) -> FloquetSpectrum:
    """Eigendecompose U_F, normalize eigenoperators and classify the spectrum."""
    if uf.kind != "map":
        raise ContractError("decompose expects an evolution map, not a generator")
    n = uf.dim_hilbert
    dec = eig_general(uf.mat)
    q = dec.eigenvalues
    ops = np.empty((q.size, n, n), dtype=complex)
    left = dec.left.copy()
    for j in range(q.size):
        raw = devectorize(dec.right[:, j], n)
        c = phase_factor(raw)
        ops[j] = c * raw
        left[j] = left[j] / c  # keep left_j . vec(rho_j) = 1
    classes = tuple(
        STEADY if abs(z - 1) <= steady_tol else NON_DECAYING if abs(abs(z) - 1) <= eps_mod else TRANSIENT
        for z in q
    )
    report, cluster_of = _jordan_report(uf.mat, q, cluster_tol, rank_tol, eps_mod)
    if strict:
        _raise_on_unit_circle_defect(report)
    tolerances = dict(eps_mod=eps_mod, steady_tol=steady_tol, cluster_tol=cluster_tol, rank_tol=rank_tol)
    return FloquetSpectrum(q, ops, left, classes, report, cluster_of, period, tolerances)


def spectrum_rows(spectrum: FloquetSpectrum) -> list[dict]:
    """One record per eigenvalue, in the column order of the spectrum CSV."""
    traces = spectrum.traces()
    clusters = {c.id: c for c in spectrum.jordan.clusters}
    rows = []
    for j, z in enumerate(spectrum.eigenvalues):
        c = clusters[int(spectrum.cluster_of[j])]
        rows.append({
            "re_q": float(z.real), "im_q": float(z.imag), "modulus": float(abs(z)),
            "class": spectrum.classes[j],
            "trace_re": float(traces[j].real), "trace_im": float(traces[j].imag),
            "cluster_id": c.id, "algebraic_mult": c.algebraic, "geometric_mult": c.geometric,
        })
    return rows


SPECTRUM_COLUMNS = ("re_q", "im_q", "modulus", "class", "trace_re", "trace_im",
                    "cluster_id", "algebraic_mult", "geometric_mult")


# ----------------------------------------------------------------------------- steady states


@dataclass(frozen=True)
class Ness:
    rho0: np.ndarray
    times: np.ndarray
    trajectory: tuple[np.ndarray, ...]
    fixed_point_residual: float
    steady_dim: int
    evaluations: int = 0


def steady_space(uf: Superoperator, dim: int) -> tuple[np.ndarray, np.ndarray]:
    """Right and left bases (columns) of the eigenvalue-1 eigenspace of U_F.

    ``dim`` is the expected dimension (from the classified spectrum); both
    bases come from the trailing singular vectors of U_F - I.
    """
    a = uf.mat - np.eye(uf.mat.shape[0])
    u, _, vh = np.linalg.svd(a)
    return vh[-dim:].conj().T, u[:, -dim:]


def _hermitian_basis(right: np.ndarray, n: int) -> list[np.ndarray]:
    cands = []
    for k in range(right.shape[1]):
        r = devectorize(right[:, k], n)
        cands += [(r + r.conj().T) / 2, (r - r.conj().T) / 2j]
    real = np.array([np.concatenate([c.real.ravel(), c.imag.ravel()]) for c in cands])
    _, s, vh = np.linalg.svd(real, full_matrices=False)
    rank = int(np.sum(s > 1e-8 * s[0]))
    basis = []
    for row in vh[:rank]:
        m = row[: n * n].reshape(n, n) + 1j * row[n * n:].reshape(n, n)
        basis.append((m + m.conj().T) / 2)
    return basis


def _min_eig_normalized(m: np.ndarray) -> float:
    tr = np.trace(m).real
    if tr <= 1e-12 * max(1.0, np.linalg.norm(m)):
        return -np.inf
    return float(np.linalg.eigvalsh(m / tr).min())


def _coordinate_search(basis: list[np.ndarray], start: np.ndarray, psd_tol: float, budget: int) -> tuple[np.ndarray, int]:
    """Maximize the smallest eigenvalue of sum_i c_i B_i / trace over real c."""
    c = start.astype(float).copy()

    def combo(x):
        return sum(xi * b for xi, b in zip(x, basis))

    best = _min_eig_normalized(combo(c))
    evals = 1
    step = 0.5 * max(np.abs(c).max(), 1e-3)
    while best < -psd_tol and evals < budget and step > 1e-14:
        improved = False
        for i in range(len(c)):
            for sign in (1.0, -1.0):
                trial = c.copy()
                trial[i] += sign * step
                val = _min_eig_normalized(combo(trial))
                evals += 1
                if val > best:
                    c, best, improved = trial, val, True
                    break
                if evals >= budget:
                    break
            if best >= -psd_tol or evals >= budget:
                break
        if not improved:
            step *= 0.5
    if best < -psd_tol:
        raise ExtractionError(
            f"no PSD unit-trace combination of the {len(basis)}-dimensional steady space found "
            f"after {evals} evaluations (best minimum eigenvalue {best:.3e})"
        )
    m = combo(c)
    return m / np.trace(m).real, evals


def extract_ness(spectrum: FloquetSpectrum, uf: Superoperator, model: LindbladModel | None = None,
                 cfg: PropagatorConfig | None = None, *, samples: int = 64, psd_tol: float = 1e-8,
                 budget: int = 10_000) -> Ness:
    """Certified physical steady state and its one-period trajectory.

    A one-dimensional steady space gives the state directly (Hermitize and
    normalize the eigenoperator). For a degenerate steady space a coordinate
    search over real combinations of a Hermitian basis maximizes the smallest
    eigenvalue, started from the spectral projection of the maximally mixed
    state onto the steady space.
    """
    n = uf.dim_hilbert
    steady = spectrum.steady_indices
    if steady.size == 0:
        raise ExtractionError("spectrum has no eigenvalue within steady_tol of 1")
    evals = 0
    if steady.size == 1:
        r = spectrum.eigenoperators[steady[0]]
        r = (r + r.conj().T) / 2
        tr = np.trace(r).real
        if abs(tr) < 1e-12:
            raise ExtractionError("steady eigenoperator is traceless")
        rho = r / tr
        if np.linalg.eigvalsh(rho).min() < -psd_tol:
            raise ExtractionError(f"non-degenerate steady eigenoperator is not PSD (min eig {np.linalg.eigvalsh(rho).min():.3e})")
    else:
        right, left = steady_space(uf, steady.size)
        basis = _hermitian_basis(right, n)
        gram = left.conj().T @ right
        proj = right @ np.linalg.solve(gram, left.conj().T @ vectorize(np.eye(n) / n))
        p = devectorize(proj, n)
        p = (p + p.conj().T) / 2
        start = np.array([np.vdot(b, p).real for b in basis])
        rho, evals = _coordinate_search(basis, start, psd_tol, budget)
    rho = (rho + rho.conj().T) / 2
    residual = float(np.linalg.norm(uf.mat @ vectorize(rho) - vectorize(rho)))

    times, traj = np.array([]), ()
    if model is not None:
        cfg = cfg or PropagatorConfig()
        times, maps = period_path(model, cfg, samples)
        traj = tuple(devectorize(m @ vectorize(rho), n) for m in maps)
    return Ness(rho, times, traj, residual, int(steady.size), evals)


def ness_for_model(model: LindbladModel, cfg: PropagatorConfig | None = None, **kwargs) -> tuple[Ness, FloquetSpectrum, Superoperator]:
    """Convenience pipeline: U_F, its spectrum and the certified NESS."""
    cfg = cfg or PropagatorConfig()
    uf = floquet_operator(model, cfg)
    spec = decompose(uf, model.period)
    return extract_ness(spec, uf, model, cfg, **kwargs), spec, uf


# ----------------------------------------------------------------------------- eigenmodes


def eigenmode_trajectory(model: LindbladModel, cfg: PropagatorConfig, lam: complex, rho_j,
                         *, uf: Superoperator | None = None, samples: int = 64,
                         tol: float = 1e-7) -> tuple[np.ndarray, list[np.ndarray]]:
    """Periodic eigenmode exp(-lam (t - t0)) U(t, t0) rho_j over one period."""
    rho_j = np.asarray(rho_j, dtype=complex)
    uf = uf or floquet_operator(model, cfg)
    q = np.exp(lam * model.period)
    v = vectorize(rho_j)
    res = np.linalg.norm(uf.mat @ v - q * v) / max(np.linalg.norm(v), 1e-300)
    if res > tol:
        raise ContractError(f"(exp(lambda T), rho) is not an eigenpair of U_F (relative residual {res:.3e})")
    times, maps = period_path(model, cfg, samples)
    modes = [np.exp(-lam * (t - cfg.t0)) * devectorize(m @ v, model.dim) for t, m in zip(times, maps)]
    return times, modes


# ----------------------------------------------------------------------------- projections


@dataclass(frozen=True)
class NonDecayingProjection:
    eigenvalues: np.ndarray
    coefficients: np.ndarray
    operators: np.ndarray
    steady_coefficient: complex | None

    def evolved(self, m: int) -> np.ndarray:
        """Non-decaying component after m periods: sum_j a_j q_j^m rho_j."""
        return np.einsum("j,jab->ab", self.coefficients * self.eigenvalues**m, self.operators)


def nondecaying_projection(spectrum: FloquetSpectrum, uf: Superoperator, rho_init, *, ness: Ness | None = None,
                           cond_warn: float = 1e8) -> NonDecayingProjection:
    """Coefficients of ``rho_init`` on the unit-circle eigenoperators.

    Coefficients come from left eigenvectors biorthogonalized within each
    cluster. If a NESS is supplied and the steady space is one-dimensional,
    the NESS itself is the steady operator and its coefficient is the trace
    of ``rho_init``.
    """
    report = spectrum.jordan
    _raise_on_unit_circle_defect(report)
    v = vectorize(rho_init)
    idx = spectrum.nondecaying_indices
    by_cluster: dict[int, list[int]] = {}
    for j in idx:
        by_cluster.setdefault(int(spectrum.cluster_of[j]), []).append(int(j))

    eigs, coefs, ops = [], [], []
    steady_coef = None
    use_ness = ness is not None and spectrum.steady_indices.size == 1
    for _, members in sorted(by_cluster.items()):
        if use_ness and members == [int(spectrum.steady_indices[0])]:
            a = complex(np.trace(np.asarray(rho_init)))
            eigs.append(1.0 + 0j)
            coefs.append(a)
            ops.append(ness.rho0)
            steady_coef = a
            continue
        vr = np.stack([vectorize(spectrum.eigenoperators[j]) for j in members], axis=1)
        wl = spectrum.left[members]
        gram = wl @ vr
        if np.linalg.cond(gram) > cond_warn:
            warnings.warn(f"ill-conditioned biorthogonalization (cond {np.linalg.cond(gram):.2e})", RuntimeWarning,
                          stacklevel=2)
        a = np.linalg.solve(gram, wl @ v)
        for j, aj in zip(members, a):
            eigs.append(spectrum.eigenvalues[j])
            coefs.append(aj)
            ops.append(spectrum.eigenoperators[j])
            if spectrum.classes[j] == STEADY and len(spectrum.steady_indices) == 1:
                steady_coef = aj
    n = spectrum.dim_hilbert
    return NonDecayingProjection(
        np.array(eigs, dtype=complex),
        np.array(coefs, dtype=complex),
        np.array(ops, dtype=complex).reshape(len(ops), n, n),
        steady_coef,
    )
