import numpy as np
import pytest
from hypothesis import given, strategies as st

from qbeig.hamiltonian import scale_matrix_for_qpe
from qbeig.linalg import random_hermitian, random_uniform_state
from qbeig.qpe import (RegisterContractError, RegisterLayout, apply_qpe, apply_qpe_inverse,
                       measure_eigenvalue_register, qft, qft_inverse, register_distribution)


def diag_problem(phases):
    """Scaled problem whose scaled matrix is diag(phases) (bound 1/2 keeps it unchanged after shift)."""
    phases = np.asarray(phases, dtype=float)
    # (M + b I) / (4 b) = diag(phases) with b = 1/4
    return scale_matrix_for_qpe(np.diag(phases - 0.25), 0.25)


def textbook_distribution(theta, r):
    M = 2**r
    k = np.arange(M)
    amps = np.array([np.sum(np.exp(2j * np.pi * k * (theta - y / M))) / M for y in range(M)])
    return np.abs(amps) ** 2


def test_exact_phase_lands_on_index():
    prob = diag_problem([0.0, 0.25])
    layout = RegisterLayout(2, 1)
    out = apply_qpe(prob, layout, layout.embed([0, 1], ancilla=0))
    assert np.argmax(np.abs(out)) == 0b0_01_1
    assert abs(out[0b0_01_1]) == pytest.approx(1.0)


@given(st.integers(1, 5), st.floats(0.0, 0.5))
def test_distribution_matches_textbook_formula(r, theta):
    prob = diag_problem([theta, 0.1])
    layout = RegisterLayout(r, 1)
    out = apply_qpe(prob, layout, layout.embed([1, 0]))
    np.testing.assert_allclose(register_distribution(out, layout), textbook_distribution(theta, r), atol=1e-10)


def test_superposition_gives_squared_amplitudes():
    r = 4
    phases = np.array([0, 1, 3, 7]) / 16
    b = np.array([0.1, 0.5j, -0.3, 0.2])
    b = b / np.linalg.norm(b)
    layout = RegisterLayout(r, 2)
    dist = register_distribution(apply_qpe(diag_problem(phases), layout, layout.embed(b)), layout)
    expected = np.zeros(16)
    expected[[0, 1, 3, 7]] = np.abs(b) ** 2
    np.testing.assert_allclose(dist, expected, atol=1e-12)


@given(st.integers(0, 500))
def test_inverse_round_trip(seed):
    rng = np.random.default_rng(seed)
    m = random_hermitian(4, rng)
    bound = float(np.max(np.sum(np.abs(m), axis=1)))
    prob = scale_matrix_for_qpe(m, bound)
    layout = RegisterLayout(3, 2)
    psi = layout.embed(random_uniform_state(2, rng))
    back = apply_qpe_inverse(prob, layout, apply_qpe(prob, layout, psi))
    np.testing.assert_allclose(back, psi, atol=1e-12)


def test_qpe_is_unitary_on_arbitrary_states(rng):
    prob = diag_problem([0.1, 0.3])
    layout = RegisterLayout(3, 1)
    psi = rng.standard_normal(layout.dim) + 1j * rng.standard_normal(layout.dim)
    psi /= np.linalg.norm(psi)
    out = apply_qpe(prob, layout, psi, strict=False)
    assert np.linalg.norm(out) == pytest.approx(1.0)
    np.testing.assert_allclose(apply_qpe_inverse(prob, layout, out), psi, atol=1e-12)


def test_strict_register_contract():
    prob = diag_problem([0.1, 0.3])
    layout = RegisterLayout(2, 1)
    psi = np.zeros(layout.dim, dtype=complex)
    psi[0b1_01_0] = 1.0
    with pytest.raises(RegisterContractError):
        apply_qpe(prob, layout, psi)
    with pytest.raises(ValueError):
        apply_qpe(prob, layout, np.ones(3))


def test_qft_matches_dft_matrix():
    r = 3
    M = 2**r
    dft = np.exp(2j * np.pi * np.outer(np.arange(M), np.arange(M)) / M) / np.sqrt(M)
    for y in range(M):
        e = np.zeros(M, dtype=complex)
        e[y] = 1
        np.testing.assert_allclose(qft(e, (0, r)), dft[:, y], atol=1e-12)
        np.testing.assert_allclose(qft_inverse(qft(e, (0, r)), (0, r)), e, atol=1e-12)


def test_qft_on_subregister_leaves_other_qubits():
    # qubits [1, 3) of a 4-qubit state; qubits 0 and 3 untouched
    rng = np.random.default_rng(0)
    psi = rng.standard_normal(16) + 0j
    out = qft(psi, (1, 3)).reshape(2, 4, 2)
    ref = np.fft.ifft(psi.reshape(2, 4, 2), axis=1, norm="ortho")
    np.testing.assert_allclose(out, ref)
    with pytest.raises(ValueError):
        qft(psi, (2, 5))


def test_measurement_collapses_and_reports_eigenvalue():
    prob = diag_problem([0.25, 0.125])
    layout = RegisterLayout(3, 1)
    out = apply_qpe(prob, layout, layout.embed([0, 1]))
    readout, post = measure_eigenvalue_register(out, layout, prob, np.random.default_rng(0))
    assert readout.bits == 1 and readout.probability == pytest.approx(1.0)
    assert readout.eigenvalue == pytest.approx(prob.to_eigenvalue(0.125))
    assert np.linalg.norm(post) == pytest.approx(1.0)


def test_layout_properties():
    layout = RegisterLayout(7, 4)
    assert layout.num_qubits == 12 and layout.grid == 128 and layout.dim == 4096
    psi = layout.embed(np.array([1, 0, 0, 0] * 4) / 2)
    assert layout.register_leakage(psi) == 0
    with pytest.raises(ValueError):
        RegisterLayout(0, 2)
