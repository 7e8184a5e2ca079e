import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from floquet_lindblad.errors import ContractError, ExtractionError, IntegrityError
from floquet_lindblad.model import LOWERING, RAISING, amplitude_damping, static_model
from floquet_lindblad.propagator import PropagatorConfig, floquet_operator
from floquet_lindblad.spectral import (
    NON_DECAYING, STEADY, TRANSIENT, _coordinate_search, decompose, detect_jordan, eigenmode_trajectory,
    extract_ness, fix_phase, floquet_exponent, ness_for_model, nondecaying_projection, spectrum_rows,
)
from floquet_lindblad.superop import Superoperator, vectorize
from floquet_lindblad.verification import random_density, random_model

CFG = PropagatorConfig()


def test_amplitude_damping_spectrum_and_ness():
    ness, spec, uf = ness_for_model(amplitude_damping(1.0, period=1.0))
    moduli = np.sort(np.abs(spec.eigenvalues))
    assert np.abs(moduli - np.sort([1, math.exp(-1), math.exp(-0.5), math.exp(-0.5)])).max() < 1e-9
    assert np.abs(moduli - [0.36787944117144233, 0.6065306597126334, 0.6065306597126334, 1]).max() < 1e-9
    assert sorted(spec.classes) == [STEADY, TRANSIENT, TRANSIENT, TRANSIENT]
    assert np.abs(ness.rho0 - np.diag([1, 0])).max() < 1e-9
    cluster = [c for c in spec.jordan.clusters if abs(c.center - math.exp(-0.5)) < 1e-9][0]
    assert cluster.algebraic == 2 and cluster.geometric == 2


def test_unitary_model_all_on_unit_circle():
    spec = decompose(floquet_operator(static_model(np.array([[0.3, 0.2], [0.2, -0.4]]))))
    assert len(spec.nondecaying_indices) == 4
    assert set(spec.classes) <= {STEADY, NON_DECAYING}
    assert spec.classes.count(NON_DECAYING) == 2


def test_random_driven_model_generic(rng):
    m = random_model(rng)
    spec = decompose(floquet_operator(m), m.period)
    assert len(spec.steady_indices) == 1
    q = spec.eigenvalues
    assert max(np.abs(q - np.conj(z)).min() for z in q) < 1e-8


def test_lambda_branch(rng):
    m = random_model(rng)
    spec = decompose(floquet_operator(m), m.period)
    lam = spec.lambdas()
    assert np.all(lam.imag >= 0) and np.all(lam.imag < 2 * math.pi / m.period)
    assert np.abs(np.exp(lam * m.period) - spec.eigenvalues).max() < 1e-12
    assert floquet_exponent(np.array([-1.0]), 2.0)[0] == pytest.approx(1j * math.pi / 2)
    with pytest.raises(ContractError):
        decompose(floquet_operator(m)).lambdas()


def test_decompose_requires_map():
    with pytest.raises(ContractError):
        decompose(Superoperator(2, np.zeros((4, 4))))


def test_eigenoperators_normalized(rng):
    m = random_model(rng)
    uf = floquet_operator(m)
    spec = decompose(uf)
    for q, rho in zip(spec.eigenvalues, spec.eigenoperators):
        assert abs(np.linalg.norm(rho) - 1) < 1e-12
        v = vectorize(rho)
        assert np.linalg.norm(uf.mat @ v - q * v) < 1e-10
    assert np.abs(spec.left @ np.stack([vectorize(r) for r in spec.eigenoperators], 1) - np.eye(m.dim**2)).max() < 1e-8


def test_phase_rule():
    op = np.array([[0, 0.4j], [0, -0.8j]])
    fixed = fix_phase(op)
    assert abs(np.linalg.norm(fixed) - 1) < 1e-15
    d = np.diag(fixed)
    assert d[np.argmax(np.abs(d))].real > 0 and abs(d[np.argmax(np.abs(d))].imag) < 1e-15
    # traceless Hermitian up to phase: the phase is removed
    h = np.array([[0, 1 - 1j], [1 + 1j, 0]])
    got = fix_phase(np.exp(0.7j) * h)
    assert np.abs(got - got.conj().T).max() < 1e-15


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_real_nondegenerate_eigenvalue_gives_hermitian_operator(seed):
    m = random_model(np.random.default_rng(seed))
    spec = decompose(floquet_operator(m, PropagatorConfig(128)))
    q = spec.eigenvalues
    for j, z in enumerate(q):
        others = np.delete(q, j)
        if abs(z.imag) < 1e-12 and np.abs(others - z).min() > 1e-4:
            rho = spec.eigenoperators[j]
            assert np.abs(rho - rho.conj().T).max() < 1e-9


def test_jordan_hand_built_block():
    mat = np.zeros((4, 4), dtype=complex)
    mat[0, 0] = 1
    mat[1:3, 1:3] = [[0.5, 1], [0, 0.5]]
    mat[3, 3] = 0.2
    s = np.random.default_rng(3).normal(size=(4, 4))
    report = detect_jordan(s @ mat @ np.linalg.inv(s), 1e-6)
    bad = report.deficient
    assert len(bad) == 1 and bad[0].deficiency == 1 and abs(bad[0].center - 0.5) < 1e-6
    assert not bad[0].on_unit_circle


def test_jordan_diagonalizable(rng):
    report = detect_jordan(floquet_operator(random_model(rng)), 1e-6)
    assert not report.deficient


def test_jordan_on_unit_circle_raises():
    mat = np.eye(4, dtype=complex)
    mat[1, 2] = 1
    with pytest.raises(IntegrityError) as err:
        detect_jordan(mat, 1e-6)
    assert "cluster" in str(err.value)
    assert detect_jordan(mat, 1e-6, strict=False).unit_circle_violations()
    with pytest.raises(ValueError):
        detect_jordan(mat, 0.0)


def test_detailed_balance_populations():
    g1, g2 = 0.9, 0.3
    m = static_model(np.diag([0.0, 1.0]), [(LOWERING, g1), (RAISING, g2)])
    ness, _, _ = ness_for_model(m)
    assert np.abs(ness.rho0 - np.diag([g1 / (g1 + g2), g2 / (g1 + g2)])).max() < 1e-12


def test_ness_invariants(rng):
    m = random_model(rng)
    ness, _, _ = ness_for_model(m)
    rho = ness.rho0
    assert np.abs(rho - rho.conj().T).max() < 1e-10
    assert abs(np.trace(rho) - 1) < 1e-10
    assert np.linalg.eigvalsh(rho).min() >= -1e-8
    assert ness.fixed_point_residual <= 1e-7
    assert len(ness.trajectory) == 65
    assert np.abs(ness.trajectory[-1] - ness.trajectory[0]).max() < 1e-8
    assert np.abs(ness.trajectory[0] - rho).max() == 0


def test_degenerate_steady_space_closed_model(rng):
    m = random_model(rng, dim=3, n_jumps=0)
    ness, spec, _ = ness_for_model(m)
    assert ness.steady_dim == 3
    assert np.linalg.eigvalsh(ness.rho0).min() >= -1e-8
    assert abs(np.trace(ness.rho0) - 1) < 1e-10
    assert ness.fixed_point_residual < 1e-7


def test_degenerate_steady_space_two_sinks():
    lower01 = np.zeros((4, 4)); lower01[0, 1] = 1
    lower23 = np.zeros((4, 4)); lower23[2, 3] = 1
    h = np.diag([0.0, 1.0, 0.3, 1.7])
    m = static_model(h, [(lower01, 0.5), (lower23, 0.8)])
    ness, spec, _ = ness_for_model(m)
    assert ness.steady_dim == 2
    pops = np.diag(ness.rho0).real
    assert pops[1] < 1e-9 and pops[3] < 1e-9 and abs(pops[0] + pops[2] - 1) < 1e-10
    assert np.linalg.eigvalsh(ness.rho0).min() >= -1e-8


def test_coordinate_search_repairs_non_psd_start():
    basis = [np.diag([1.0, 0.0]).astype(complex), np.diag([0.0, 1.0]).astype(complex)]
    rho, evals = _coordinate_search(basis, np.array([1.5, -0.5]), 1e-8, 10_000)
    assert np.linalg.eigvalsh(rho).min() >= -1e-8 and abs(np.trace(rho) - 1) < 1e-12
    assert evals > 1
    with pytest.raises(ExtractionError):
        _coordinate_search([np.diag([1.0, -1.0]).astype(complex)], np.array([1.0]), 1e-8, 50)


def test_extract_without_steady_eigenvalue():
    uf = Superoperator(2, 0.5 * np.eye(4), "map")
    with pytest.raises(ExtractionError):
        extract_ness(decompose(uf), uf)


def test_eigenmode_steady_matches_ness(rng):
    m = random_model(rng)
    ness, spec, uf = ness_for_model(m)
    times, modes = eigenmode_trajectory(m, CFG, 0.0, ness.rho0, uf=uf)
    assert max(np.abs(a - b).max() for a, b in zip(modes, ness.trajectory)) < 1e-15


def test_eigenmode_static_is_constant():
    m = amplitude_damping(0.6)
    uf = floquet_operator(m)
    spec = decompose(uf, m.period)
    for lam, rho in zip(spec.lambdas(), spec.eigenoperators):
        _, modes = eigenmode_trajectory(m, CFG, lam, rho, uf=uf)
        assert max(np.abs(x - rho).max() for x in modes) < 1e-12


def test_eigenmode_driven_periodic(rng):
    m = random_model(rng)
    uf = floquet_operator(m)
    spec = decompose(uf, m.period)
    lam = spec.lambdas()
    for j in range(m.dim**2):
        _, modes = eigenmode_trajectory(m, CFG, lam[j], spec.eigenoperators[j], uf=uf)
        assert np.abs(modes[-1] - modes[0]).max() < 1e-7
    assert max(np.abs(x - modes[0]).max() for x in modes) > 1e-3


def test_eigenmode_rejects_non_eigenpair(rng):
    m = random_model(rng)
    with pytest.raises(ContractError):
        eigenmode_trajectory(m, CFG, 0.0, np.eye(m.dim) / m.dim)


def test_projection_of_ness(rng):
    m = random_model(rng)
    ness, spec, uf = ness_for_model(m)
    proj = nondecaying_projection(spec, uf, ness.rho0, ness=ness)
    assert abs(proj.steady_coefficient - 1) < 1e-12
    assert np.abs(proj.evolved(5) - ness.rho0).max() < 1e-9
    proj2 = nondecaying_projection(spec, uf, ness.rho0)
    assert abs(proj2.steady_coefficient * np.trace(spec.eigenoperators[spec.steady_indices[0]]) - 1) < 1e-9


def test_projection_maximally_mixed_amplitude_damping():
    ness, spec, uf = ness_for_model(amplitude_damping())
    proj = nondecaying_projection(spec, uf, np.eye(2) / 2, ness=ness)
    assert abs(proj.steady_coefficient - 1) < 1e-12
    # I/2 = rho0 - 1/2 diag(1, -1): the remainder is the decaying population mode
    remainder = np.eye(2) / 2 - proj.evolved(0)
    assert np.abs(remainder - (-0.5) * np.diag([1, -1])).max() < 1e-12


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_power_iteration_oracle(seed):
    r = np.random.default_rng(seed)
    m = random_model(r)
    ness, spec, uf = ness_for_model(m)
    q2 = spec.max_transient_modulus()
    steps = math.ceil(math.log(1e-8) / math.log(q2))
    rho = random_density(r, m.dim)
    proj = nondecaying_projection(spec, uf, rho, ness=ness)
    assert abs(proj.steady_coefficient - 1) < 1e-10
    v = vectorize(rho)
    for _ in range(steps):
        v = uf.mat @ v
    assert np.linalg.norm(v - vectorize(proj.evolved(steps))) < 1e-6


def test_convergence_envelope(rng):
    m = random_model(rng)
    ness, spec, uf = ness_for_model(m)
    q2 = spec.max_transient_modulus()
    rho = random_density(rng, m.dim)
    coef = spec.left @ vectorize(rho)
    transient = spec.indices(TRANSIENT)
    c = float(np.sum(np.abs(coef[transient])))  # unit-norm eigenoperators
    v = vectorize(rho)
    for k in range(1, 40):
        v = uf.mat @ v
        assert np.linalg.norm(v - vectorize(ness.rho0)) <= c * q2**k * (1 + 1e-6) + 1e-12


def test_static_models_have_nonpositive_real_exponents(rng):
    for _ in range(5):
        m = random_model(rng, harmonics=0)
        spec = decompose(floquet_operator(m), m.period)
        assert spec.lambdas().real.max() <= 1e-9


def test_spectrum_rows(tmp_path):
    spec = decompose(floquet_operator(amplitude_damping()))
    rows = spectrum_rows(spec)
    assert len(rows) == 4
    assert sum(r["class"] == STEADY for r in rows) == 1
    steady = [r for r in rows if r["class"] == STEADY][0]
    assert abs(steady["trace_re"] - 1) < 1e-12
    assert list(rows[0]) == ["re_q", "im_q", "modulus", "class", "trace_re", "trace_im", "cluster_id",
                             "algebraic_mult", "geometric_mult"]
