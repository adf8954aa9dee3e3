"""Fixed-point amplitude amplification with phase-estimation oracles.

One Grover step applies the target reflection first and the initial-state
reflection second; the overall -1 of the textbook iterate is dropped.
Each step costs two oracle queries (a phase estimation and its inverse).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .hamiltonian import ScaledProblem
from .linalg import SpectralDecomposition
from .qpe import RegisterContractError, RegisterLayout, apply_qpe, apply_qpe_inverse

# guards ceil() against values like 1.0000000000000004
_CEIL_GUARD = 1e-9


class NoSolutionError(ValueError):
    """Zero overlap: amplification cannot reach the target."""


def chebyshev_T(degree: float, x: float) -> float:
    """Chebyshev polynomial of the first kind, with fractional degree allowed for x >= -1."""
    if degree < 0:
        raise ValueError("degree must be >= 0")
    if abs(x) <= 1.0:
        return math.cos(degree * math.acos(x))
    if x > 1.0:
        return math.cosh(degree * math.acosh(x))
    if float(degree).is_integer():
        return (-1) ** int(degree) * math.cosh(degree * math.acosh(-x))
    raise ValueError("fractional degree is undefined for x < -1")


@dataclass(frozen=True)
class PhaseSchedule:
    l: int
    delta: float
    eta: float
    alphas: tuple[float, ...]
    betas: tuple[float, ...]

    @property
    def L(self) -> int:
        return 2 * self.l + 1

    @property
    def queries(self) -> int:
        return 2 * self.l

    def __iter__(self):
        return iter(zip(self.alphas, self.betas))

    def __len__(self):
        return self.l


def ylc_schedule(l: int, delta: float) -> PhaseSchedule:
    """Phase pairs giving final fidelity >= 1 - delta whenever the overlap is above the design threshold.

    alpha_j = beta_{l-j+1} = -2 arccot(tan(2 pi j / L) sqrt(1 - eta^2)),
    with 1/eta = T_{1/L}(1/sqrt(delta)) and arccot taking values in (0, pi).
    """
    if l < 1:
        raise ValueError("need at least one iteration")
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    L = 2 * l + 1
    eta = 1.0 / chebyshev_T(1.0 / L, 1.0 / math.sqrt(delta))
    width = math.sqrt(max(0.0, 1.0 - eta * eta))
    alphas = tuple(-2.0 * math.atan2(1.0, math.tan(2 * math.pi * j / L) * width)
                   for j in range(1, l + 1))
    return PhaseSchedule(l, delta, eta, alphas, alphas[::-1])


def query_count_ylc_raw(p: float, delta: float) -> float:
    if not 0 <= p <= 1:
        raise ValueError("overlap must lie in [0, 1]")
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    if p == 0:
        raise NoSolutionError("zero overlap with the target")
    return math.log(2.0 / math.sqrt(delta)) / math.sqrt(p) - 1.0


def query_count_ylc(p: float, delta: float) -> int:
    """Smallest integer q >= ln(2/sqrt(delta))/sqrt(p) - 1 (clamped at 0)."""
    return max(0, math.ceil(query_count_ylc_raw(p, delta) - _CEIL_GUARD))


def iterations_for_queries(q: int) -> int:
    """Grover steps needed for q queries at two queries per step (at least one)."""
    return max(1, math.ceil(q / 2))


def query_count_pi3(mu: float, delta: float) -> int:
    """Query count of the pi/3 fixed-point search: ln(delta/2)/ln(1 - mu) - 1, rounded up."""
    if not 0 < mu < 1:
        raise ValueError("mu must lie strictly inside (0, 1)")
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    raw = math.log(delta / 2.0) / math.log(1.0 - mu) - 1.0
    return max(0, math.ceil(raw - _CEIL_GUARD))


@dataclass(frozen=True)
class OracleWindow:
    """Closed interval of phases [lo, hi] tested on the r-bit grid."""

    lo: float
    hi: float
    r: int

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError("empty window: lo > hi")

    @classmethod
    def from_problem(cls, problem: ScaledProblem, r: int) -> "OracleWindow":
        return cls(problem.window[0], problem.window[1], r)

    def member(self, y) -> np.ndarray | bool:
        phase = np.asarray(y) / 2**self.r
        return (phase >= self.lo - 1e-12) & (phase <= self.hi + 1e-12)

    def mask(self) -> np.ndarray:
        return np.asarray(self.member(np.arange(2**self.r)), dtype=bool)

    def nearest_grid(self, phase) -> np.ndarray:
        return np.rint(np.asarray(phase) * 2**self.r).astype(int) % 2**self.r

    def marks(self, phase) -> np.ndarray:
        """Whether an exact eigenphase rounds to a grid point inside the window."""
        return np.asarray(self.member(self.nearest_grid(phase)), dtype=bool)


def _phase_on_subspace(vectors: np.ndarray, angle: float, state: np.ndarray) -> np.ndarray:
    """(I - (1 - e^{i angle}) P) state, P projecting on the orthonormal columns."""
    if vectors.shape[1] == 0:
        return state.copy()
    coeffs = vectors.conj().T @ state
    return state - (1.0 - np.exp(1j * angle)) * (vectors @ coeffs)


def reflect_target_ideal(spectral: SpectralDecomposition, window: tuple[float, float],
                         beta: float, state) -> np.ndarray:
    """Exact eigenprojector version of the oracle: phase e^{i beta} on eigenvalues in window."""
    lo, hi = window
    mask = (spectral.eigenvalues >= lo) & (spectral.eigenvalues <= hi)
    return _phase_on_subspace(spectral.eigenvectors[:, mask], beta, np.asarray(state, dtype=complex))


def reflect_target_circuit(problem: ScaledProblem, layout: RegisterLayout, window: OracleWindow,
                           beta: float, state, strict: bool = True) -> np.ndarray:
    """U_PE^dagger . CZ(beta) . U_PE on the full three-register state.

    CZ(beta) puts e^{i beta} on every eigenvalue-register value inside the
    window when the ancilla is |1>.
    """
    if window.r != layout.r:
        raise ValueError("window grid does not match the layout")
    if strict:
        psi0 = layout.reshape(state)
        if np.sum(np.abs(psi0[0]) ** 2) > 1e-10:
            raise RegisterContractError("ancilla must be |1>")
    psi = layout.reshape(apply_qpe(problem, layout, state, strict=strict))
    psi[1, window.mask(), :] *= np.exp(1j * beta)
    return apply_qpe_inverse(problem, layout, psi.ravel())


def reflect_initial(phi, alpha: float, state) -> np.ndarray:
    """(I - (1 - e^{i alpha}) |phi><phi|) state on the eigenvector register."""
    phi = np.asarray(phi, dtype=complex)
    if abs(np.linalg.norm(phi) - 1.0) > 1e-10:
        raise ValueError("phi must be normalized")
    state = np.asarray(state, dtype=complex)
    return state - (1.0 - np.exp(1j * alpha)) * phi * np.vdot(phi, state)


def householder_prep(phi) -> tuple[complex, np.ndarray]:
    """(g, w) with V = g (I - 2 w w^H) unitary and V|0> = phi."""
    phi = np.asarray(phi, dtype=complex)
    g = phi[0] / abs(phi[0]) if abs(phi[0]) > 1e-15 else 1.0
    target = phi / g
    w = -target
    w[0] += 1.0
    norm = np.linalg.norm(w)
    w = w / norm if norm > 1e-15 else np.zeros_like(w)
    return g, w


def reflect_initial_circuit(phi, alpha: float, layout: RegisterLayout, state,
                            prep: tuple[complex, np.ndarray] | None = None) -> np.ndarray:
    """V . CZ'(alpha) . V^dagger: V prepares phi from |0>, CZ' phases |0>_sys|1>_anc."""
    if prep is None:
        prep = householder_prep(phi)
    _, w = prep
    psi = layout.reshape(state).copy()
    # global phase g of V cancels between V and V^dagger
    psi -= 2.0 * np.multiply.outer(psi @ w.conj(), w)
    psi[1, :, 0] *= np.exp(1j * alpha)
    psi -= 2.0 * np.multiply.outer(psi @ w.conj(), w)
    return psi.ravel()


class IdealOracle:
    """Oracle acting on the n-qubit register through the exact eigenprojector."""

    mode = "ideal"

    def __init__(self, spectral: SpectralDecomposition, marked):
        self.spectral = spectral
        self.marked = np.asarray(marked, dtype=bool)
        self._vectors = spectral.eigenvectors[:, self.marked]

    def prepare(self, phi) -> np.ndarray:
        return np.array(phi, dtype=complex)

    def reflect_target(self, state, beta):
        return _phase_on_subspace(self._vectors, beta, state)

    def reflect_initial(self, state, phi, alpha):
        return reflect_initial(phi, alpha, state)

    def system_overlap(self, state) -> float:
        """Weight of the state inside the marked eigenspace."""
        return float(np.sum(np.abs(self._vectors.conj().T @ state) ** 2))


class CircuitOracle:
    """Oracle simulated gate-by-gate on ancilla + eigenvalue + eigenvector registers."""

    mode = "circuit"

    def __init__(self, problem: ScaledProblem, layout: RegisterLayout, window: OracleWindow):
        self.problem = problem
        self.layout = layout
        self.window = window
        self.marked = window.marks(problem.spectral.eigenvalues)
        self._vectors = problem.spectral.eigenvectors[:, self.marked]
        self._prep = None

    def prepare(self, phi) -> np.ndarray:
        self._prep = (np.asarray(phi, dtype=complex), householder_prep(phi))
        return self.layout.embed(phi)

    def reflect_target(self, state, beta):
        return reflect_target_circuit(self.problem, self.layout, self.window, beta, state, strict=False)

    def reflect_initial(self, state, phi, alpha):
        prep = None
        if self._prep is not None and np.array_equal(self._prep[0], phi):
            prep = self._prep[1]
        return reflect_initial_circuit(phi, alpha, self.layout, state, prep)

    def system_overlap(self, state) -> float:
        """Weight of the eigenvector register's reduced state inside the marked eigenspace."""
        psi = self.layout.reshape(state)
        return float(np.sum(np.abs(psi @ self._vectors.conj()) ** 2))


def grover_iteration(state, phi, oracle, alpha: float, beta: float) -> np.ndarray:
    return oracle.reflect_initial(oracle.reflect_target(state, beta), phi, alpha)


def amplify(oracle, phi, schedule: PhaseSchedule, trace: bool = False):
    """Run every step of the schedule from phi; optionally return overlaps after each step."""
    state = oracle.prepare(phi)
    history = [oracle.system_overlap(state)]
    for alpha, beta in schedule:
        state = grover_iteration(state, phi, oracle, alpha, beta)
        if trace:
            history.append(oracle.system_overlap(state))
    return (state, history) if trace else state
