"""Statevector simulation of phase estimation on three registers.

Layout of the full state index (most significant first)::

    ancilla (1 qubit) | eigenvalue register (r qubits) | eigenvector register (n qubits)

so amplitudes reshape to ``(2, 2**r, 2**n)``. Qubit j of the eigenvalue
register is bit j of the register integer y and controls U^(2^j).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import hadamard

from .hamiltonian import ScaledProblem
from .linalg import unitary_exp

REGISTER_TOL = 1e-10


class RegisterContractError(ValueError):
    """The eigenvalue register was not in |0...0> where the circuit requires it."""


@dataclass(frozen=True)
class RegisterLayout:
    r: int
    n: int

    def __post_init__(self):
        if self.r < 1 or self.n < 1:
            raise ValueError("r and n must both be >= 1")

    @property
    def num_qubits(self) -> int:
        return self.r + self.n + 1

    @property
    def dim(self) -> int:
        return 2**self.num_qubits

    @property
    def grid(self) -> int:
        return 2**self.r

    def reshape(self, state) -> np.ndarray:
        state = np.asarray(state, dtype=complex)
        if state.size != self.dim:
            raise ValueError(f"state has {state.size} amplitudes, layout needs {self.dim}")
        return state.reshape(2, self.grid, 2**self.n)

    def embed(self, phi, ancilla: int = 1) -> np.ndarray:
        """|ancilla>|0...0>|phi> as a flat vector."""
        phi = np.asarray(phi, dtype=complex)
        if phi.size != 2**self.n:
            raise ValueError("phi does not match the eigenvector register")
        psi = np.zeros((2, self.grid, phi.size), dtype=complex)
        psi[ancilla, 0] = phi
        return psi.ravel()

    def register_leakage(self, state) -> float:
        """Probability mass with the eigenvalue register outside |0...0>."""
        psi = self.reshape(state)
        return float(np.sum(np.abs(psi[:, 1:, :]) ** 2))


@dataclass(frozen=True)
class PhaseReadout:
    bits: int
    phase: float
    eigenvalue: float
    probability: float


def _register_view(state, register: tuple[int, int]) -> tuple[np.ndarray, int]:
    state = np.asarray(state, dtype=complex)
    total = state.size.bit_length() - 1
    if state.size != 2**total:
        raise ValueError("state length is not a power of two")
    start, stop = register
    if not 0 <= start < stop <= total:
        raise ValueError(f"register {register} outside a {total}-qubit state")
    return state.reshape(2 ** (total - stop), 2 ** (stop - start), 2**start), total


def qft(state, register: tuple[int, int]) -> np.ndarray:
    """QFT |y> = 2^{-r/2} sum_k exp(2 pi i y k / 2^r) |k> on qubits [start, stop)."""
    view, _ = _register_view(state, register)
    return np.fft.ifft(view, axis=1, norm="ortho").ravel()


def qft_inverse(state, register: tuple[int, int]) -> np.ndarray:
    view, _ = _register_view(state, register)
    return np.fft.fft(view, axis=1, norm="ortho").ravel()


@lru_cache(maxsize=16)
def _walsh(r: int) -> np.ndarray:
    return hadamard(2**r).astype(complex) / np.sqrt(2**r)


def _powers(problem: ScaledProblem, r: int, inverse: bool = False) -> list[np.ndarray]:
    # memoized on the (immutable) problem instance
    cache = problem.__dict__.setdefault("_power_cache", {})
    key = (r, inverse)
    if key not in cache:
        mats = [unitary_exp(problem.scaled_matrix, 2**j, spectrum=problem.spectral) for j in range(r)]
        cache[key] = [m.conj().T for m in mats] if inverse else mats
    return cache[key]


def _require_register_zero(psi: np.ndarray, what: str) -> None:
    leak = float(np.sum(np.abs(psi[:, 1:, :]) ** 2))
    if leak > REGISTER_TOL:
        raise RegisterContractError(f"{what}: eigenvalue register not in |0>, leaked weight {leak:.3e}")


def apply_qpe(problem: ScaledProblem, layout: RegisterLayout, state, strict: bool = True) -> np.ndarray:
    """Hadamards, controlled U^(2^j) with U = exp(2 pi i A_s), then inverse QFT.

    With ``strict`` the eigenvalue register must start in |0...0>. The
    operator itself is the full unitary, so ``strict=False`` is safe for
    states carrying leakage from earlier rounds.
    """
    psi = layout.reshape(state).copy()
    if problem.scaled_matrix.shape[0] != psi.shape[2]:
        raise ValueError("problem size does not match the eigenvector register")
    if strict:
        _require_register_zero(psi, "apply_qpe")
    psi = np.einsum("ky,ayx->akx", _walsh(layout.r), psi)
    ys = np.arange(layout.grid)
    for j, u in enumerate(_powers(problem, layout.r)):
        ctrl = ((ys >> j) & 1).astype(bool)
        psi[:, ctrl, :] = psi[:, ctrl, :] @ u.T
    psi = np.fft.fft(psi, axis=1, norm="ortho")
    return psi.ravel()


def apply_qpe_inverse(problem: ScaledProblem, layout: RegisterLayout, state) -> np.ndarray:
    psi = layout.reshape(state)
    psi = np.fft.ifft(psi, axis=1, norm="ortho")
    ys = np.arange(layout.grid)
    powers = _powers(problem, layout.r, inverse=True)
    for j in reversed(range(layout.r)):
        ctrl = ((ys >> j) & 1).astype(bool)
        psi[:, ctrl, :] = psi[:, ctrl, :] @ powers[j].T
    psi = np.einsum("ky,ayx->akx", _walsh(layout.r), psi)
    return psi.ravel()


def register_distribution(state, layout: RegisterLayout) -> np.ndarray:
    """Born probabilities of each eigenvalue-register outcome y."""
    psi = layout.reshape(state)
    return np.sum(np.abs(psi) ** 2, axis=(0, 2))


def measure_eigenvalue_register(state, layout: RegisterLayout, problem: ScaledProblem,
                                rng: np.random.Generator) -> tuple[PhaseReadout, np.ndarray]:
    """Sample y, collapse the state, and map y / 2^r back to an eigenvalue.

    The eigenvalue is in the units of the (shifted) Hamiltonian that
    ``problem`` was built from.
    """
    probs = register_distribution(state, layout)
    total = probs.sum()
    y = int(rng.choice(layout.grid, p=probs / total))
    psi = layout.reshape(state).copy()
    keep = np.zeros(layout.grid, dtype=bool)
    keep[y] = True
    psi[:, ~keep, :] = 0.0
    psi /= np.linalg.norm(psi)
    phase = y / layout.grid
    readout = PhaseReadout(y, phase, float(problem.to_eigenvalue(phase)), float(probs[y] / total))
    return readout, psi.ravel()
