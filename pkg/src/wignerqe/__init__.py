"""Wigner-induced random spherical harmonic bases and their quantum ergodicity statistics.

Submodules
----------
linalg
    Hermitian eigensolver (compiled kernel with a pure-Python fallback) and Haar sampling.
ensembles
    Generalized Wigner ensembles with variance profiles.
sphere
    Spherical harmonics, quadrature grids and operator blocks.
qe_stats
    Index sets, quadratic forms and the ergodicity, band, normality and local statistics.
oracle
    Exact Haar and Gaussian reference moments.
runner
    Config-driven, resumable Monte Carlo experiments and the command line.
"""

from ._backend import BACKEND
from .errors import ConvergenceError, ValidationError
from .ensembles import WignerEnsembleSpec, gue_spec, sample_wigner
from .linalg import EigenDecomposition, haar_unitary, hermitian_eig
from .qe_stats import build_index_set, qe_statistic
from .sphere import OperatorBlock, diagonal_symbol_block, mult_operator_block

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "ConvergenceError",
    "ValidationError",
    "WignerEnsembleSpec",
    "gue_spec",
    "sample_wigner",
    "EigenDecomposition",
    "haar_unitary",
    "hermitian_eig",
    "build_index_set",
    "qe_statistic",
    "OperatorBlock",
    "diagonal_symbol_block",
    "mult_operator_block",
    "__version__",
]
