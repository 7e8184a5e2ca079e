import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from floquet_lindblad.errors import ValidationError
from floquet_lindblad.io import ParseError, load_model, model_from_dict, save_model
from floquet_lindblad.model import (
    LOWERING, Jump, LindbladModel, amplitude_damping, ensure_valid, hamiltonian_at, is_physical,
    physicality_defects, static_model, validate,
)
from floquet_lindblad.optics import inversion_symmetric, lab_model, vector_potential
from floquet_lindblad.verification import random_model


def test_static_hamiltonian_is_constant(rng):
    h0 = np.array([[1.0, 0.2j], [-0.2j, -0.5]])
    m = static_model(h0)
    for t in rng.uniform(0, 10, size=5):
        assert np.abs(hamiltonian_at(m, t) - h0).max() == 0


def test_conjugate_pair_at_zero():
    a = 0.3
    v = np.array([[0.1, 0.4 + 0.2j], [0.7, -0.3]])
    h0 = np.diag([0.0, 1.0])
    m = LindbladModel(2, 1.0, {0: h0, 1: 1j * a * v, -1: -1j * a * v.conj().T})
    h = hamiltonian_at(m, 0.0)
    assert np.abs(h - (h0 + 1j * a * v - 1j * a * v.conj().T)).max() < 1e-15
    assert np.abs(h - h.conj().T).max() < 1e-15


def test_vector_potential_scalar():
    # i*0.2*exp(-i pi/2) - i*0.2*exp(i pi/2) = 0.2 + 0.2
    assert abs(vector_potential(0.2, 1.0, math.pi / 2) - 0.4) < 1e-15
    assert abs(vector_potential(0.2j, 1.0, 0.0) + 0.4) < 1e-15


def test_lab_model_is_h0_plus_a_of_t_v():
    bands = inversion_symmetric(4, amplitude=0.07 - 0.02j)
    m = lab_model(bands, 1)
    for t in (0.0, 0.4, 2.2):
        expected = np.diag([bands.eps1[1], bands.eps2[1]]) + vector_potential(bands.amplitude, bands.omega, t) * bands.v0[1]
        assert np.abs(hamiltonian_at(m, t) - expected).max() < 1e-15


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0, 100))
def test_hamiltonian_periodic_and_hermitian(seed, t):
    m = random_model(np.random.default_rng(seed))
    h = hamiltonian_at(m, t)
    assert np.abs(hamiltonian_at(m, t + m.period) - h).max() <= 1e-12 * max(np.abs(h).max(), 1) * max(1, t)
    assert np.abs(h - h.conj().T).max() < 1e-12 * max(np.abs(h).max(), 1)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_fourier_round_trip(seed):
    m = random_model(np.random.default_rng(seed))
    lmax = m.max_harmonic
    n_t = 2 * lmax + 3
    ts = np.arange(n_t) * m.period / n_t
    samples = np.stack([hamiltonian_at(m, t) for t in ts])
    for l in range(-lmax, lmax + 1):
        proj = np.mean(samples * np.exp(1j * l * m.omega * ts)[:, None, None], axis=0)
        assert np.abs(proj - m.h(l)).max() < 1e-10


def test_validate_negative_rate():
    m = static_model(np.zeros((2, 2)), [(LOWERING, -0.1)])
    report = validate(m)
    assert any("jump 0" in r and "negative rate" in r for r in report)
    with pytest.raises(ValidationError) as err:
        ensure_valid(m)
    assert err.value.report == report


def test_validate_missing_partner():
    m = LindbladModel(2, 1.0, {0: np.eye(2), 1: np.ones((2, 2))})
    assert any("hermiticity" in r for r in validate(m))


def test_validate_non_hermitian_pair():
    a = np.array([[0, 1], [0, 0]], dtype=complex)
    m = LindbladModel(2, 1.0, {0: np.eye(2), 1: a, -1: a})
    assert any("hermiticity" in r for r in validate(m))
    m = LindbladModel(2, 1.0, {0: np.array([[0, 1], [0, 0]])})
    assert any("hermiticity" in r for r in validate(m))


def test_validate_shapes_and_frequency():
    assert validate(LindbladModel(2, -1.0, {0: np.eye(2)}))
    assert validate(LindbladModel(2, 1.0, {0: np.eye(3)}))
    assert validate(LindbladModel(2, 1.0, {0: np.eye(2)}, (Jump(np.eye(3), 1.0),)))
    assert validate(LindbladModel(2, 1.0, {0: np.array([[np.nan, 0], [0, 0]])}))


def test_amplitude_damping_is_valid():
    assert validate(amplitude_damping()) == []


def test_physicality():
    assert is_physical(np.diag([0.3, 0.7]))
    assert not is_physical(np.diag([1.2, -0.2]))
    herm, tr, mn = physicality_defects(np.array([[0.5, 0.1], [0.0, 0.5]]))
    assert herm == 0.1 and tr == 0.0


def test_model_json_round_trip(tmp_path, rng):
    m = random_model(rng)
    path = tmp_path / "m.json"
    save_model(m, path)
    back = load_model(path)
    assert back.dim == m.dim and back.omega == m.omega
    for l in m.h_fourier:
        assert np.abs(back.h(l) - m.h(l)).max() == 0
    for a, b in zip(back.jumps, m.jumps):
        assert np.abs(a.operator - b.operator).max() == 0 and a.rate == b.rate


def test_model_document_variants():
    doc = {
        "dim": 2, "omega": 2.0,
        "h_fourier": [{"l": 0, "real_part": [[1, 0], [0, -1]], "imag_part": [[0, 0], [0, 0]]}],
        "jumps": [{"matrix": [[0, 1], [0, 0]], "rate": 0.5}],
    }
    m = model_from_dict(doc)
    assert np.abs(m.h(0) - np.diag([1, -1])).max() == 0
    assert m.jumps[0].rate == 0.5
    doc["h_fourier"].append({"l": 0, "matrix": [[1, 0], [0, 1]]})
    with pytest.raises(ParseError):
        model_from_dict(doc)
    with pytest.raises(ParseError):
        model_from_dict({"omega": 1.0})


def test_periodic_jump_operator():
    j = Jump(np.array([[0, 1], [0, 0]]), 1.0, {1: np.array([[0, 0], [1, 0]])})
    assert not j.is_static
    op = j.operator_at(2.0, 0.3)
    assert np.abs(op - (np.array([[0, 1], [0, 0]]) + np.exp(-0.6j) * np.array([[0, 0], [1, 0]]))).max() < 1e-15
