"""
Eigenvector purification by products of shifted operators.

Given the eigenvalues of a real symmetric matrix, the eigenvector for one of
them is obtained by repeatedly applying ``H - eps_j`` for the other
eigenvalues. A naive periodic ordering of the shifts is numerically chaotic
for wide spectra; the stabilized controller picks each shift from a weight
array that tracks the surviving eigencomponents.
"""

from .diagnostics import (
    convergence_ratios, lyapunov_estimate, shift_histogram, sigma_error, sigma_subspace)
from .eigen import dense_eig_oracle, ql_eigenvalues, spectrum_stats
from .errors import PurifyError, NotConverged, ZeroVector
from .linalg import HermitianOperator, Spectrum, apply_shifted, normalize, residual_sigma_bar
from .richardson import RunConfig, RunResult, run_naive, run_sequence, run_stabilized
from .su2 import SpinSystem, build_l2_operator, exact_spectrum, extract_degenerate_basis

__version__ = "0.1.0"
