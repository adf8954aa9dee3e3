import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from qbeig.fixedpoint import (CircuitOracle, IdealOracle, NoSolutionError, OracleWindow, PhaseSchedule,
                              amplify, chebyshev_T, householder_prep, iterations_for_queries,
                              query_count_pi3, query_count_ylc, reflect_initial, reflect_initial_circuit,
                              reflect_target_circuit, reflect_target_ideal, ylc_schedule)
from qbeig.hamiltonian import scale_matrix_for_qpe
from qbeig.linalg import eig_hermitian, random_unitary, random_uniform_state
from qbeig.qpe import RegisterLayout


def two_level_oracle(dim=8, marked=(0,)):
    spec = eig_hermitian(np.diag(np.arange(dim, dtype=float)))
    mask = np.zeros(dim, dtype=bool)
    mask[list(marked)] = True
    return IdealOracle(spec, mask)


def state_with_overlap(p, dim=8):
    phi = np.zeros(dim, dtype=complex)
    phi[0] = math.sqrt(p)
    phi[1] = math.sqrt(1 - p)
    return phi


def fidelity_closed_form(p, l, delta):
    """Failure probability delta * T_L(T_{1/L}(1/sqrt(delta)) sqrt(1 - p))^2."""
    L = 2 * l + 1
    x = chebyshev_T(1 / L, 1 / math.sqrt(delta)) * math.sqrt(1 - p)
    return 1 - delta * chebyshev_T(L, x) ** 2


def grid_problem(n=3, r=4, seed=0):
    """Scaled problem with every eigenphase an exact multiple of 2^-r."""
    rng = np.random.default_rng(seed)
    dim = 2**n
    phases = rng.integers(0, 2 ** (r - 1), size=dim) / 2**r
    u = random_unitary(dim, rng)
    scaled = u @ np.diag(phases) @ u.conj().T
    bound = 0.25
    return scale_matrix_for_qpe(4 * bound * scaled - bound * np.eye(dim), bound), phases


def test_chebyshev_values():
    assert chebyshev_T(3, 0.5) == pytest.approx(4 * 0.125 - 3 * 0.5)
    assert chebyshev_T(2, 3.0) == pytest.approx(2 * 9 - 1)
    assert chebyshev_T(3, -2.0) == pytest.approx(4 * -8 + 6)
    assert chebyshev_T(1 / 3, chebyshev_T(3, 1.7)) == pytest.approx(1.7)
    with pytest.raises(ValueError):
        chebyshev_T(0.5, -2.0)
    with pytest.raises(ValueError):
        chebyshev_T(-1, 0.3)


@pytest.mark.parametrize("p,delta,q", [(1 / 16, 0.01, 11), (1 / 32, 0.01, 16), (1.0, 0.01, 2), (0.25, 0.5, 2)])
def test_query_count_pins(p, delta, q):
    assert query_count_ylc(p, delta) == q


def test_query_count_errors():
    with pytest.raises(NoSolutionError):
        query_count_ylc(0.0, 0.01)
    with pytest.raises(ValueError):
        query_count_ylc(0.5, 1.5)
    with pytest.raises(ValueError):
        query_count_ylc(-0.1, 0.1)


@given(st.floats(1e-4, 1.0), st.floats(1e-4, 0.9))
def test_query_count_is_minimal_integer(p, delta):
    q = query_count_ylc(p, delta)
    raw = math.log(2 / math.sqrt(delta)) / math.sqrt(p) - 1
    assert q >= raw - 1e-9
    assert q - 1 < raw or q == 0


@given(st.floats(1e-3, 0.5), st.floats(1e-3, 0.5))
def test_pi3_needs_more_queries_for_small_overlap(p, delta):
    assume_small = p < 0.05 and delta < 0.05
    if assume_small:
        assert query_count_pi3(p, delta) > query_count_ylc(p, delta)
    assert query_count_pi3(p, delta) >= 0


def test_iterations_for_queries():
    assert iterations_for_queries(11) == 6
    assert iterations_for_queries(16) == 8
    assert iterations_for_queries(0) == 1


def test_schedule_symmetry():
    s = ylc_schedule(6, 0.01)
    assert s.L == 13 and s.queries == 12 and len(s) == 6
    np.testing.assert_allclose(s.alphas, s.betas[::-1])
    assert all(-2 * math.pi < a < 0 for a in s.alphas)
    assert 1 / s.eta == pytest.approx(chebyshev_T(1 / 13, 10.0))


@given(st.integers(1, 10), st.floats(1e-3, 0.5), st.floats(0.0, 1.0))
def test_ideal_fidelity_matches_closed_form(l, delta, p):
    oracle = two_level_oracle()
    state = amplify(oracle, state_with_overlap(p), ylc_schedule(l, delta))
    assert oracle.system_overlap(state) == pytest.approx(fidelity_closed_form(p, l, delta), abs=1e-9)


@given(st.floats(0.01, 1.0), st.floats(1e-3, 0.2))
def test_fixed_point_guarantee(p_min, delta):
    l = iterations_for_queries(query_count_ylc(p_min, delta))
    schedule = ylc_schedule(l, delta)
    oracle = two_level_oracle()
    for p in np.linspace(p_min, 1.0, 7):
        f = oracle.system_overlap(amplify(oracle, state_with_overlap(p), schedule))
        assert f >= 1 - delta - 1e-9


@pytest.mark.parametrize("p", [0.01, 0.25, 0.6])
def test_standard_grover_limit(p):
    oracle = two_level_oracle()
    theta = math.asin(math.sqrt(p))
    for k in range(1, 11):
        sched = PhaseSchedule(k, 0.5, 0.0, (math.pi,) * k, (math.pi,) * k)
        f = oracle.system_overlap(amplify(oracle, state_with_overlap(p), sched))
        assert f == pytest.approx(math.sin((2 * k + 1) * theta) ** 2, abs=1e-9)


def test_trace_history_length():
    oracle = two_level_oracle()
    _, hist = amplify(oracle, state_with_overlap(0.1), ylc_schedule(4, 0.01), trace=True)
    assert len(hist) == 5 and hist[0] == pytest.approx(0.1)


def test_reflections_are_unitary_phase_gates(rng):
    phi = random_uniform_state(3, rng)
    psi = random_uniform_state(3, rng)
    out = reflect_initial(phi, 0.7, psi)
    assert np.linalg.norm(out) == pytest.approx(1.0)
    np.testing.assert_allclose(reflect_initial(phi, 0.7, phi), np.exp(0.7j) * phi)
    spec = eig_hermitian(np.diag([0.1, 0.2, 0.3, 0.4]))
    e = np.eye(4, dtype=complex)
    np.testing.assert_allclose(reflect_target_ideal(spec, (0.15, 0.25), 1.1, e[1]), np.exp(1.1j) * e[1])
    np.testing.assert_allclose(reflect_target_ideal(spec, (0.15, 0.25), 1.1, e[2]), e[2])


@given(st.integers(0, 1000))
def test_householder_prep_maps_zero_to_phi(seed):
    phi = random_uniform_state(3, np.random.default_rng(seed))
    g, w = householder_prep(phi)
    v = g * (np.eye(8) - 2 * np.outer(w, w.conj()))
    np.testing.assert_allclose(v[:, 0], phi, atol=1e-12)
    np.testing.assert_allclose(v @ v.conj().T, np.eye(8), atol=1e-12)


def test_circuit_initial_reflection_matches_ideal(rng):
    layout = RegisterLayout(2, 3)
    phi = random_uniform_state(3, rng)
    psi = random_uniform_state(3, rng)
    out = layout.reshape(reflect_initial_circuit(phi, 0.9, layout, layout.embed(psi)))
    np.testing.assert_allclose(out[1, 0], reflect_initial(phi, 0.9, psi), atol=1e-12)
    assert np.sum(np.abs(out[0])) == 0 and np.sum(np.abs(out[1, 1:])) == 0


@given(st.integers(0, 300), st.floats(-math.pi, math.pi))
def test_circuit_target_reflection_matches_ideal_on_grid(seed, beta):
    r = 4
    prob, _ = grid_problem(3, r, seed)
    prob = prob.with_epsilon(0.1)
    window = OracleWindow.from_problem(prob, r)
    layout = RegisterLayout(r, 3)
    psi = random_uniform_state(3, np.random.default_rng(seed + 1))
    out = layout.reshape(reflect_target_circuit(prob, layout, window, beta, layout.embed(psi)))
    lo, hi = prob.window
    ideal = reflect_target_ideal(prob.spectral, (lo - 1e-12, hi + 1e-12), beta, psi)
    assert abs(np.vdot(ideal, out[1, 0])) ** 2 >= 1 - 1e-9


def test_circuit_oracle_amplifies_like_ideal():
    r = 4
    prob, _ = grid_problem(3, r, 5)
    prob = prob.with_epsilon(0.05)
    window = OracleWindow.from_problem(prob, r)
    circ = CircuitOracle(prob, RegisterLayout(r, 3), window)
    ideal = IdealOracle(prob.spectral, window.marks(prob.spectral.eigenvalues))
    phi = random_uniform_state(3, np.random.default_rng(2))
    sched = ylc_schedule(3, 0.05)
    fc = circ.system_overlap(amplify(circ, phi, sched))
    fi = ideal.system_overlap(amplify(ideal, phi, sched))
    assert fc == pytest.approx(fi, abs=1e-9)


def test_window_membership_and_marks():
    w = OracleWindow(0.2, 0.3, 4)
    assert list(np.flatnonzero(w.mask())) == [4]
    assert w.marks(np.array([0.25, 0.27, 0.1])).tolist() == [True, True, False]
    with pytest.raises(ValueError):
        OracleWindow(0.3, 0.2, 4)
