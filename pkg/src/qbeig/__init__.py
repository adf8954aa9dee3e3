"""Eigenvalues of a Hamiltonian near a given point, via phase estimation and fixed-point amplitude amplification."""

from .fixedpoint import (CircuitOracle, IdealOracle, OracleWindow, PhaseSchedule, amplify,
                         query_count_pi3, query_count_ylc, ylc_schedule)
from .hamiltonian import PauliSum, ScaledProblem, build_h2_jw, build_heisenberg, scale_for_qpe, shift, to_matrix
from .linalg import SpectralDecomposition, StateVector, eig_hermitian
from .qpe import RegisterLayout, apply_qpe, apply_qpe_inverse
from .solver import SolverConfig, SolverResult, solve_type2

__version__ = "0.1.0"
