"""Pauli-sum Hamiltonians and their rescaling into the phase-estimation window.

Qubit convention: qubit 0 is the least-significant bit of a basis-state index
and the RIGHTMOST character of a Pauli string, so ``"IIIZ"`` is Z on qubit 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Iterable

import numpy as np

from .linalg import SpectralDecomposition, eig_hermitian

PAULI_CHARS = frozenset("IXYZ")
MAX_MATRIX_QUBITS = 13
TARGET_PHASE = 0.25


class HamiltonianFormatError(ValueError):
    """Malformed Hamiltonian text; the message carries the line number."""


@dataclass(frozen=True)
class PauliSum:
    """Real-weighted sum of Pauli strings on ``num_qubits`` qubits.

    Build with :meth:`from_terms`, which merges repeated strings and keeps
    first-appearance order.
    """

    num_qubits: int
    terms: tuple[tuple[float, str], ...] = ()

    def __post_init__(self):
        if self.num_qubits < 1:
            raise ValueError("num_qubits must be >= 1")
        seen = set()
        for coef, word in self.terms:
            if len(word) != self.num_qubits or not set(word) <= PAULI_CHARS:
                raise ValueError(f"bad Pauli string {word!r} for {self.num_qubits} qubits")
            if not math.isfinite(coef):
                raise ValueError(f"non-finite coefficient for {word}")
            if word in seen:
                raise ValueError(f"duplicate Pauli string {word}; use PauliSum.from_terms")
            seen.add(word)

    @classmethod
    def from_terms(cls, num_qubits: int, terms: Iterable[tuple[float, str]]) -> "PauliSum":
        merged: dict[str, float] = {}
        for coef, word in terms:
            coef = float(coef)
            if not math.isfinite(coef):
                raise ValueError(f"coefficient of {word} must be a finite real")
            word = word.upper()
            merged[word] = merged.get(word, 0.0) + coef
        return cls(num_qubits, tuple((c, w) for w, c in merged.items()))

    @property
    def identity(self) -> str:
        return "I" * self.num_qubits

    def coefficient(self, word: str) -> float:
        for coef, w in self.terms:
            if w == word:
                return coef
        return 0.0

    def one_norm(self) -> float:
        return float(sum(abs(c) for c, _ in self.terms))

    def __len__(self):
        return len(self.terms)

    def __add__(self, other: "PauliSum") -> "PauliSum":
        if other.num_qubits != self.num_qubits:
            raise ValueError("qubit count mismatch")
        return PauliSum.from_terms(self.num_qubits, self.terms + other.terms)


def pauli_string_matrix(word: str) -> np.ndarray:
    """Dense matrix of one Pauli string (rightmost character acts on qubit 0)."""
    n = len(word)
    dim = 2**n
    flip = zmask = 0
    n_y = 0
    for k, ch in enumerate(reversed(word)):
        if ch in "XY":
            flip |= 1 << k
        if ch in "ZY":
            zmask |= 1 << k
        n_y += ch == "Y"
    x = np.arange(dim)
    parity = np.zeros(dim, dtype=np.int64)
    bits = x & zmask
    while np.any(bits):
        parity ^= bits & 1
        bits >>= 1
    # Y|b> = i(-1)^b |1-b>, Z|b> = (-1)^b |b>
    phase = (1j**n_y) * (1 - 2 * parity)
    m = np.zeros((dim, dim), dtype=complex)
    m[x ^ flip, x] = phase
    return m


def to_matrix(h: PauliSum) -> np.ndarray:
    if h.num_qubits > MAX_MATRIX_QUBITS:
        raise ValueError(f"{h.num_qubits} qubits exceeds the dense limit of {MAX_MATRIX_QUBITS}")
    dim = 2**h.num_qubits
    m = np.zeros((dim, dim), dtype=complex)
    for coef, word in h.terms:
        m += coef * pauli_string_matrix(word)
    return m


def build_heisenberg(n: int, jx: float, jy: float, jz: float, h: float,
                     periodic: bool = True) -> PauliSum:
    """XYZ chain with a uniform Z field; site j sits on qubit j - 1."""
    if n < 2:
        raise ValueError("Heisenberg chain needs at least 2 sites")

    def word(ops: dict[int, str]) -> str:
        return "".join(ops.get(q, "I") for q in reversed(range(n)))

    terms = []
    bonds = n if periodic else n - 1
    for j in range(bonds):
        k = (j + 1) % n
        for op, coupling in (("X", jx), ("Y", jy), ("Z", jz)):
            terms.append((coupling, word({j: op, k: op})))
    for j in range(n):
        terms.append((h, word({j: "Z"})))
    return PauliSum.from_terms(n, terms)


_H2_TERMS = (
    (-0.81261, "IIII"),
    (0.171201, "IIIZ"),
    (0.171201, "IIZI"),
    (-0.2227965, "IZII"),
    (-0.2227965, "ZIII"),
    (0.16862325, "IIZZ"),
    (0.12054625, "IZIZ"),
    (0.165868, "IZZI"),
    (0.165868, "ZIIZ"),
    (0.12054625, "ZIZI"),
    (0.17434925, "ZZII"),
    (-0.04532175, "XXYY"),
    (0.04532175, "XYYX"),
    (0.04532175, "YXXY"),
    (-0.04532175, "YYXX"),
)


def build_h2_jw() -> PauliSum:
    """Four-qubit Jordan-Wigner Hamiltonian of H2 (minimal basis)."""
    return PauliSum.from_terms(4, _H2_TERMS)


def shift(h: PauliSum, lambda0: float) -> PauliSum:
    """H - lambda0 * I."""
    return PauliSum.from_terms(h.num_qubits, h.terms + ((-float(lambda0), h.identity),))


def parse_pauli_text(text: str) -> PauliSum:
    """Parse ``<coefficient> <pauli_string>`` lines; ``#`` starts a comment."""
    terms = []
    n = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise HamiltonianFormatError(f"line {lineno}: expected '<coefficient> <pauli_string>', got {raw!r}")
        try:
            coef = float(parts[0])
        except ValueError:
            raise HamiltonianFormatError(f"line {lineno}: bad coefficient {parts[0]!r}") from None
        if not math.isfinite(coef):
            raise HamiltonianFormatError(f"line {lineno}: coefficient must be finite")
        word = parts[1].upper()
        if not set(word) <= PAULI_CHARS:
            raise HamiltonianFormatError(f"line {lineno}: bad Pauli string {parts[1]!r}")
        if n is None:
            n = len(word)
        elif len(word) != n:
            raise HamiltonianFormatError(f"line {lineno}: string length {len(word)} != {n}")
        terms.append((coef, word))
    if n is None:
        raise HamiltonianFormatError("no terms found")
    return PauliSum.from_terms(n, terms)


def format_pauli_text(h: PauliSum) -> str:
    return "".join(f"{coef!r} {word}\n" for coef, word in h.terms)


def load_pauli_file(path) -> PauliSum:
    with open(path) as fh:
        return parse_pauli_text(fh.read())


@dataclass(frozen=True)
class ScaledProblem:
    """A shifted Hamiltonian mapped affinely into phases within [0, 1/2].

    ``phase = (lambda + offset) / scale`` with offset = bound and
    scale = 4 * bound, where bound is the Pauli 1-norm. The target point
    (shifted eigenvalue 0) lands on phase 1/4.
    """

    scaled_matrix: np.ndarray
    coefficient_bound: float
    window: tuple[float, float]
    spectral: SpectralDecomposition = field(repr=False)

    @property
    def offset(self) -> float:
        return self.coefficient_bound

    @property
    def scale(self) -> float:
        return 4.0 * self.coefficient_bound

    @property
    def num_qubits(self) -> int:
        return self.scaled_matrix.shape[0].bit_length() - 1

    def to_phase(self, value):
        return (np.asarray(value, dtype=float) + self.offset) / self.scale

    def to_eigenvalue(self, phase):
        return np.asarray(phase, dtype=float) * self.scale - self.offset

    def eigenvalues(self) -> np.ndarray:
        """Spectrum in shifted-Hamiltonian units."""
        return self.to_eigenvalue(self.spectral.eigenvalues)

    def with_epsilon(self, epsilon: float) -> "ScaledProblem":
        return replace(self, window=_phase_window(epsilon, self.scale))


def _phase_window(epsilon: float, scale: float) -> tuple[float, float]:
    if epsilon < 0:
        raise ValueError("epsilon must be non-negative")
    half = epsilon / scale
    return max(0.0, TARGET_PHASE - half), min(float(np.nextafter(1.0, 0.0)), TARGET_PHASE + half)


def scale_matrix_for_qpe(matrix, bound: float, epsilon: float = 0.0) -> ScaledProblem:
    """Rescale a Hermitian matrix whose spectrum lies within [-bound, bound]."""
    if not bound > 0:
        raise ValueError("coefficient bound must be positive (zero operator?)")
    matrix = np.asarray(matrix, dtype=complex)
    dim = matrix.shape[0]
    scaled = (matrix + bound * np.eye(dim)) / (4.0 * bound)
    spectral = eig_hermitian(scaled)
    lo, hi = spectral.eigenvalues[0], spectral.eigenvalues[-1]
    if lo < -1e-12 or hi > 0.5 + 1e-12:
        raise ValueError(f"spectrum exceeds the stated bound {bound}")
    return ScaledProblem(scaled, float(bound), _phase_window(epsilon, 4.0 * bound), spectral)


def scale_for_qpe(h_shifted: PauliSum, epsilon: float = 0.0) -> ScaledProblem:
    """(H + L*I) / (4L) with L the coefficient 1-norm, identity term included."""
    bound = h_shifted.one_norm()
    if bound == 0:
        raise ValueError("cannot scale the zero operator")
    return scale_matrix_for_qpe(to_matrix(h_shifted), bound, epsilon)


def hermitian_embed(a) -> np.ndarray:
    """[[0, A], [A^H, 0]]; its nonnegative eigenvalues are the singular values of A."""
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("expected a square matrix")
    z = np.zeros_like(a)
    return np.block([[z, a], [a.conj().T, z]])


def hermitian_parts(a) -> tuple[np.ndarray, np.ndarray]:
    """A + A^H and i(A - A^H); both Hermitian, and jointly diagonal when A is normal."""
    a = np.asarray(a, dtype=complex)
    return a + a.conj().T, 1j * (a - a.conj().T)


def random_pauli_sum(n: int, num_terms: int, rng: np.random.Generator) -> PauliSum:
    words = ["".join(rng.choice(list("IXYZ"), size=n)) for _ in range(num_terms)]
    coefs = rng.uniform(-1.0, 1.0, size=num_terms)
    return PauliSum.from_terms(n, zip(coefs, words))
