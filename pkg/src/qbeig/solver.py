"""Type-II eigensolver: find an eigenpair of H near a given point lambda0.

Pipeline per window size: shift H by lambda0, rescale into the phase window,
then for each of K initial states run the fixed-point search with
phase-estimation oracles, apply one more phase estimation and read the
eigenvalue register. If no trial lands in the window with a small residual,
the window half-width doubles and the whole batch is rerun.
"""

from __future__ import annotations

import math
from fractions import Fraction
from dataclasses import dataclass, field

import numpy as np

from .fixedpoint import (CircuitOracle, IdealOracle, OracleWindow, amplify,
                         iterations_for_queries, query_count_ylc, ylc_schedule)
from .hamiltonian import PauliSum, ScaledProblem, scale_for_qpe, shift, to_matrix
from .linalg import StateVector, random_uniform_state
from .qpe import RegisterLayout, apply_qpe, measure_eigenvalue_register

MAX_CIRCUIT_QUBITS = 13


def prob_overlap_at_least_1_over_N(N: int) -> float:
    """Pr(|<t|phi>|^2 >= 1/N) for Haar-random phi in C^N: (1 - 1/N)^(N-1)."""
    if N < 2:
        raise ValueError("N must be >= 2")
    return (1.0 - 1.0 / N) ** (N - 1)


def prob_basis_set_hit(m: int, N: int) -> float:
    """Probability that one of m fixed basis states has overlap >= 1/N with a Haar-random target.

    Inclusion-exclusion: 1 - sum_{k=0}^{m} (-1)^k C(m, k) (1 - k/N)^(N-1),
    summed in exact rationals since the alternating terms cancel badly.
    """
    if N < 1 or not 1 <= m <= N:
        raise ValueError("need 1 <= m <= N")
    miss = sum((-1) ** k * math.comb(m, k) * Fraction(N - k, N) ** (N - 1) for k in range(m + 1))
    return float(1 - miss)


def min_repetitions(target: float) -> int:
    """Least K with 1 - (1 - 1/e)^K >= target."""
    if not 0 <= target < 1:
        raise ValueError("target must lie in [0, 1)")
    miss = 1.0 - math.exp(-1.0)
    k = 1
    while 1.0 - miss**k < target:
        k += 1
    return k


def prepare_initial_states(strategy: str, n: int, K: int, rng: np.random.Generator):
    """K initial states as (label, amplitudes) pairs.

    ``basis`` draws distinct computational basis states; ``random`` draws
    Haar-random states.
    """
    dim = 2**n
    if strategy == "basis":
        if K > dim:
            raise ValueError(f"cannot draw {K} distinct basis states from {dim}")
        out = []
        for x in rng.choice(dim, size=K, replace=False):
            phi = np.zeros(dim, dtype=complex)
            phi[x] = 1.0
            out.append((f"basis:{int(x)}", phi))
        return out
    if strategy == "random":
        return [(f"random:{k}", random_uniform_state(n, rng)) for k in range(K)]
    raise ValueError(f"unknown strategy {strategy!r}")


def verify_candidate(h: PauliSum, value: float, u) -> float:
    """Residual ||H u - value * u||_2."""
    u = np.asarray(u, dtype=complex)
    m = to_matrix(h)
    if m.shape[0] != u.size:
        raise ValueError("dimension mismatch")
    return float(np.linalg.norm(m @ u - value * u))


@dataclass
class SolverConfig:
    lambda0: float
    epsilon: float = 0.01
    delta: float = 0.01
    r: int = 7
    strategy: str = "basis"
    trials: int = 11
    p_floor: float | None = None
    seed: int = 0
    max_epsilon_doublings: int = 10
    mode: str = "circuit"
    residual_tol: float | None = None

    def validate(self, n: int | None = None) -> None:
        if not math.isfinite(self.lambda0):
            raise ValueError("lambda0 must be finite")
        if not self.epsilon > 0:
            raise ValueError("epsilon must be > 0")
        if not 0 < self.delta < 1:
            raise ValueError("delta must lie in (0, 1)")
        if self.r < 1:
            raise ValueError("r must be >= 1")
        if self.strategy not in ("basis", "random"):
            raise ValueError("strategy must be 'basis' or 'random'")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.p_floor is not None and not 0 < self.p_floor <= 1:
            raise ValueError("p_floor must lie in (0, 1]")
        if self.max_epsilon_doublings < 0:
            raise ValueError("max_epsilon_doublings must be >= 0")
        if self.mode not in ("circuit", "ideal"):
            raise ValueError("mode must be 'circuit' or 'ideal'")
        if n is not None:
            if self.mode == "circuit" and self.r + n + 1 > MAX_CIRCUIT_QUBITS:
                raise ValueError(f"r + n + 1 = {self.r + n + 1} exceeds {MAX_CIRCUIT_QUBITS} simulated qubits")
            if self.strategy == "basis" and self.trials > 2**n:
                raise ValueError(f"{self.trials} basis trials requested but only {2**n} basis states")


@dataclass(frozen=True)
class TrialRecord:
    trial: int
    initial_state: str
    overlap: float
    fidelity: float
    measured_eigenvalue: float
    in_window: bool
    residual: float
    success: bool
    queries: int
    epsilon: float


@dataclass
class SolverResult:
    status: str
    eigenvalue: float
    eigenvector: StateVector | None
    fidelity_vs_reference: float
    queries_used: int
    trial_records: list[TrialRecord] = field(default_factory=list)
    window_used: tuple[float, float] | None = None
    iterations: int = 0

    @property
    def found(self) -> bool:
        return self.status == "found"


def _ideal_readout(oracle: IdealOracle, problem: ScaledProblem, window: OracleWindow,
                   state: np.ndarray, rng: np.random.Generator):
    """Error-free phase estimation: sample an eigenvector, report its grid phase."""
    spectral = problem.spectral
    weights = np.abs(spectral.eigenvectors.conj().T @ state) ** 2
    k = int(rng.choice(len(weights), p=weights / weights.sum()))
    y = int(window.nearest_grid(spectral.eigenvalues[k]))
    cluster = np.abs(spectral.eigenvalues - spectral.eigenvalues[k]) < 1e-9
    vecs = spectral.eigenvectors[:, cluster]
    u = vecs @ (vecs.conj().T @ state)
    return y, u / np.linalg.norm(u)


def solve_type2(h: PauliSum, config: SolverConfig) -> SolverResult:
    n = h.num_qubits
    config.validate(n)
    N = 2**n
    p_floor = config.p_floor if config.p_floor is not None else 1.0 / N
    l = iterations_for_queries(query_count_ylc(p_floor, config.delta))
    schedule = ylc_schedule(l, config.delta)
    layout = RegisterLayout(config.r, n)

    seq = np.random.SeedSequence(config.seed)
    state_seq, readout_seq = seq.spawn(2)
    initial = prepare_initial_states(config.strategy, n, config.trials, np.random.default_rng(state_seq))

    base = scale_for_qpe(shift(h, config.lambda0), 0.0)
    tol = config.residual_tol
    if tol is None:
        tol = 10.0 * 2.0**-config.r * base.scale

    records: list[TrialRecord] = []
    queries = 0
    window_phase = None
    for doubling in range(config.max_epsilon_doublings + 1):
        eps = config.epsilon * 2**doubling
        problem = base.with_epsilon(eps)
        window = OracleWindow.from_problem(problem, config.r)
        window_phase = problem.window
        if config.mode == "circuit":
            oracle = CircuitOracle(problem, layout, window)
        else:
            oracle = IdealOracle(problem.spectral, window.marks(problem.spectral.eigenvalues))
        trial_rngs = [np.random.default_rng(s) for s in readout_seq.spawn(len(initial))]
        round_hits = []
        for t, ((label, phi), rng) in enumerate(zip(initial, trial_rngs)):
            overlap = oracle.system_overlap(oracle.prepare(phi))
            state = amplify(oracle, phi, schedule)
            fid = oracle.system_overlap(state)
            if config.mode == "circuit":
                final = apply_qpe(problem, layout, state, strict=False)
                readout, collapsed = measure_eigenvalue_register(final, layout, problem, rng)
                y = readout.bits
                u = layout.reshape(collapsed)[1, y]
                u = u / np.linalg.norm(u)
            else:
                y, u = _ideal_readout(oracle, problem, window, state, rng)
            value = float(problem.to_eigenvalue(y / layout.grid)) + config.lambda0
            inside = bool(window.member(y))
            resid = verify_candidate(h, value, u)
            ok = inside and resid <= tol
            queries += schedule.queries + 1
            rec = TrialRecord(t, label, overlap, fid, value, inside, resid, ok, schedule.queries + 1, eps)
            records.append(rec)
            if ok:
                round_hits.append((resid, t, rec, u))
        if round_hits:
            _, _, best, u = min(round_hits, key=lambda item: (item[0], item[1]))
            return SolverResult("found", best.measured_eigenvalue, StateVector(u), best.fidelity,
                                queries, records, window_phase, l)
        # window widening is pointless once it covers the whole phase range
        if window_phase[0] <= 0.0 and window_phase[1] >= 0.5:
            break
    return SolverResult("not-found", math.nan, None, 0.0, queries, records, window_phase, l)
