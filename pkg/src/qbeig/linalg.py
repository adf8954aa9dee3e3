"""Dense complex linear algebra used by the simulator.

The Hermitian eigensolver here is a cyclic Jacobi method with complex
rotations. It is the classical reference every quantum routine is checked
against, so it deliberately does not call LAPACK.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

HERMITIAN_TOL = 1e-12
JACOBI_TOL = 1e-12
NORM_TOL = 1e-10


class NotHermitianError(ValueError):
    """Raised when a matrix that must be Hermitian is not."""


@dataclass(frozen=True)
class SpectralDecomposition:
    """Ascending eigenvalues and the matching orthonormal eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def dim(self) -> int:
        return len(self.eigenvalues)

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T

    def projector(self, mask) -> np.ndarray:
        """Orthogonal projector onto the span of the selected eigenvectors."""
        v = self.eigenvectors[:, np.asarray(mask, dtype=bool)]
        return v @ v.conj().T


@dataclass(frozen=True)
class StateVector:
    """Normalized amplitudes over ``num_qubits`` qubits (qubit 0 least significant)."""

    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex)
        if amps.ndim != 1 or amps.size == 0 or amps.size & (amps.size - 1):
            raise ValueError(f"state length must be a power of two, got {amps.shape}")
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"state is not normalized (norm={norm!r})")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def num_qubits(self) -> int:
        return self.amplitudes.size.bit_length() - 1

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self.amplitudes.copy()
        return self.amplitudes.astype(dtype)

    def __len__(self):
        return self.amplitudes.size


def check_hermitian(a: np.ndarray, tol: float = HERMITIAN_TOL) -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    asym = float(np.max(np.abs(a - a.conj().T))) if a.size else 0.0
    scale = max(1.0, float(np.max(np.abs(a)))) if a.size else 1.0
    if asym > tol * scale:
        raise NotHermitianError(f"matrix is not Hermitian: max |A - A^H| = {asym:.3e}")
    return a


def _round_robin(n: int):
    """Rounds of disjoint index pairs covering every pair once (circle method)."""
    m = n + (n % 2)
    idx = list(range(m))
    rounds = []
    for _ in range(m - 1):
        pairs = [(idx[i], idx[m - 1 - i]) for i in range(m // 2)]
        pairs = [(min(p, q), max(p, q)) for p, q in pairs if p < n and q < n]
        rounds.append((np.array([p for p, _ in pairs], dtype=int),
                       np.array([q for _, q in pairs], dtype=int)))
        idx = [idx[0], idx[-1]] + idx[1:-1]
    return rounds


def _off_norm(a: np.ndarray) -> float:
    off = a.copy()
    np.fill_diagonal(off, 0.0)
    return float(np.linalg.norm(off))


def eig_hermitian(a, tol: float = JACOBI_TOL, max_sweeps: int = 60) -> SpectralDecomposition:
    """Diagonalize a Hermitian matrix with parallel-ordered cyclic Jacobi sweeps.

    Every round applies N/2 disjoint complex rotations at once; a sweep
    visits each off-diagonal pair exactly once. Iteration stops when the
    off-diagonal Frobenius norm falls below ``tol * max(1, ||A||_F)``.
    """
    a = check_hermitian(a).copy()
    n = a.shape[0]
    # rows of w are the conjugated eigenvectors; row updates stay contiguous
    w = np.eye(n, dtype=complex)
    if n > 1:
        a = 0.5 * (a + a.conj().T)
        threshold = tol * max(1.0, float(np.linalg.norm(a)))
        rounds = _round_robin(n)
        for _ in range(max_sweeps):
            if _off_norm(a) <= threshold:
                break
            for p, q in rounds:
                a = _rotate(a, w, p, q)
        else:
            if _off_norm(a) > threshold:
                raise RuntimeError("Jacobi iteration did not converge")
    evals = np.real(np.diag(a)).copy()
    order = np.argsort(evals, kind="stable")
    return SpectralDecomposition(evals[order], w.conj().T[:, order].copy())


def _row_update(m: np.ndarray, p, q, jpp, jpq, jqp, jqq) -> None:
    """In place m <- J^H m for the block rotation J on rows (p, q)."""
    rp, rq = m[p, :], m[q, :]
    m[p, :] = jpp[:, None] * rp + jqp.conj()[:, None] * rq
    m[q, :] = jpq[:, None] * rp + jqq.conj()[:, None] * rq


def _rotate(a: np.ndarray, w: np.ndarray, p: np.ndarray, q: np.ndarray) -> np.ndarray:
    apq = a[p, q]
    mag = np.abs(apq)
    active = mag > 1e-300
    if not np.any(active):
        return a
    p, q, apq, mag = p[active], q[active], apq[active], mag[active]
    phase = apq / mag
    tau = (a[q, q].real - a[p, p].real) / (2.0 * mag)
    t = np.where(tau >= 0, 1.0, -1.0) / (np.abs(tau) + np.hypot(1.0, tau))
    c = 1.0 / np.hypot(1.0, t)
    s = t * c
    # J = diag(1, e^{-i phi}) @ [[c, s], [-s, c]] on each (p, q) block
    jpp, jpq = c, s
    jqp, jqq = -s * phase.conj(), c * phase.conj()

    # A Hermitian: (J^H A)^H = A J, so J^H A J is two row passes
    _row_update(a, p, q, jpp, jpq, jqp, jqq)
    a = a.conj().T.copy()
    _row_update(a, p, q, jpp, jpq, jqp, jqq)
    a[p, q] = 0.0
    a[q, p] = 0.0
    a[p, p] = a[p, p].real
    a[q, q] = a[q, q].real
    _row_update(w, p, q, jpp, jpq, jqp, jqq)
    return a


def unitary_exp(a, t: float = 1.0, spectrum: SpectralDecomposition | None = None) -> np.ndarray:
    """Return exp(2*pi*i*t*A) for Hermitian A."""
    if spectrum is None:
        spectrum = eig_hermitian(a)
    v = spectrum.eigenvectors
    phases = np.exp(2j * np.pi * t * spectrum.eigenvalues)
    return (v * phases) @ v.conj().T


def fidelity(a, b) -> float:
    a = np.asarray(a, dtype=complex).ravel()
    b = np.asarray(b, dtype=complex).ravel()
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.size} vs {b.size}")
    return float(abs(np.vdot(a, b)) ** 2)


def random_uniform_state(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random pure state on n qubits (normalized complex Gaussian)."""
    if n < 1:
        raise ValueError("need at least one qubit")
    dim = 2**n
    z = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return z / np.linalg.norm(z)


def random_hermitian(dim: int, rng: np.random.Generator) -> np.ndarray:
    z = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return 0.5 * (z + z.conj().T)


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))
