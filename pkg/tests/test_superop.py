import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from floquet_lindblad.errors import DimensionError, ValidationError
from floquet_lindblad.model import LOWERING, SIGMA_X, SIGMA_Z, LindbladModel, amplitude_damping, hamiltonian_at, static_model
from floquet_lindblad.superop import Superoperator, apply, build_liouvillian, devectorize, identity_map, vectorize
from floquet_lindblad.verification import random_density, random_matrix, random_model


def brute_force_generator(model, t):
    """Apply the master-equation right-hand side to each elementary matrix and stack columns."""
    n = model.dim
    h = hamiltonian_at(model, t)
    cols = []
    for j in range(n):
        for i in range(n):  # column-major order of vec
            e = np.zeros((n, n), dtype=complex)
            e[i, j] = 1
            out = -1j * (h @ e - e @ h)
            for jump in model.jumps:
                op = jump.operator_at(model.omega, t)
                ldl = op.conj().T @ op
                out += jump.rate * (op @ e @ op.conj().T - 0.5 * (ldl @ e + e @ ldl))
            cols.append(out.reshape(-1, order="F"))
    return np.stack(cols, axis=1)


def test_vectorize_examples():
    assert np.abs(vectorize(np.eye(2)) - [1, 0, 0, 1]).max() == 0
    e12 = np.array([[0, 1], [0, 0]])
    assert np.abs(vectorize(e12) - [0, 0, 1, 0]).max() == 0
    assert np.abs(devectorize(vectorize(e12)) - e12).max() == 0


def test_kronecker_identity(rng):
    x = random_matrix(rng, 2)
    lhs = vectorize(SIGMA_X @ x @ SIGMA_Z)
    rhs = np.kron(SIGMA_Z.T, SIGMA_X) @ vectorize(x)
    assert np.abs(lhs - rhs).max() < 1e-15


def test_devectorize_wrong_length():
    with pytest.raises(DimensionError):
        devectorize(np.zeros(5))


def test_zero_generator():
    sop = build_liouvillian(static_model(np.zeros((2, 2))), 0.0)
    assert np.abs(sop.mat).max() == 0
    assert np.abs(apply(sop, np.diag([0.3, 0.7]))).max() == 0


def test_amplitude_damping_spectrum():
    sop = build_liouvillian(amplitude_damping(1.0), 0.0)
    ev = np.sort(np.linalg.eigvals(sop.mat).real)
    assert np.abs(ev - [-1, -0.5, -0.5, 0]).max() < 1e-14
    assert np.abs(np.linalg.eigvals(sop.mat).imag).max() < 1e-14


def test_commutator_spectrum_sigma_z():
    sop = build_liouvillian(static_model(SIGMA_Z / 2), 0.0)
    ev = np.linalg.eigvals(sop.mat)
    ref = np.array([0, 0, 1j, -1j])
    assert np.abs(np.sort_complex(ev) - np.sort_complex(ref)).max() < 1e-14


def test_amplitude_damping_population_flow():
    gamma = 0.7
    sop = build_liouvillian(amplitude_damping(gamma), 0.0)
    out = apply(sop, np.diag([0, 1]))
    assert np.abs(out - gamma * np.diag([1, -1])).max() < 1e-15


def test_apply_dimension_mismatch():
    with pytest.raises(DimensionError):
        apply(identity_map(2), np.eye(3))
    with pytest.raises(DimensionError):
        Superoperator(2, np.eye(3))


def test_invalid_model_rejected():
    with pytest.raises(ValidationError):
        build_liouvillian(static_model(np.zeros((2, 2)), [(LOWERING, -1.0)]), 0.0)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0, 10))
def test_brute_force_construction(seed, t):
    m = random_model(np.random.default_rng(seed))
    sop = build_liouvillian(m, t)
    ref = brute_force_generator(m, t)
    assert np.abs(sop.mat - ref).max() < 1e-12 * max(1, np.abs(ref).max())


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0, 10))
def test_trace_annihilation_and_hermiticity_covariance(seed, t):
    r = np.random.default_rng(seed)
    m = random_model(r)
    sop = build_liouvillian(m, t)
    assert sop.trace_defect() < 1e-10
    rho = random_matrix(r, m.dim)
    a = apply(sop, rho.conj().T)
    b = apply(sop, rho).conj().T
    assert np.abs(a - b).max() < 1e-12 * max(1, np.abs(sop.mat).max())
    assert abs(np.trace(apply(sop, random_density(r, m.dim)))) < 1e-12 * max(1, np.abs(sop.mat).max())


def test_periodic_jump_generator_matches_brute_force(rng):
    from floquet_lindblad.model import Jump
    m = LindbladModel(2, 1.3, {0: SIGMA_Z}, (Jump(LOWERING, 0.4, {1: np.array([[0, 0], [0.3, 0]])}),))
    for t in (0.0, 0.5, 1.9):
        assert np.abs(build_liouvillian(m, t).mat - brute_force_generator(m, t)).max() < 1e-14
