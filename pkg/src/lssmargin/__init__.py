"""Marginal instability of linear switching systems.

Worst-case growth of matrix products, dominant-word certificates,
classification of two-block triangular families, a 3x3 pair with ``N^(1/3)``
growth, and a continuous-time switching simulator.
"""

__version__ = "0.1.0"

from .classifier import (BlockFamily, Classification, Verdict, assemble, classify, coupling_sum,
                         example1_blocks, example1_family)
from .ctsim import (SwitchingLaw, Trajectory, check_f_decreasing, example2_family, lyapunov_f,
                    propagate)
from .dominance import DominanceCertificate, candidate_dominant, leading_eigenvalue, verify_dominance
from .errors import (BudgetExceeded, DominanceUncertified, HypothesesUnmet, InsufficientData,
                     InvalidInput, LssError, NumericOverflow)
from .growth import GrowthSeries, JsrBounds, MatrixFamily, exact_mk, jsr_bounds, mk_series
from .matlib import eigenvalues, jordan_order, matrix_exp, operator_norm, spectral_radius, spectrum
from .polynorm import PolytopeNorm, build_parallelotope, gauge, is_barabanov, is_invariant_isometry
from .sublinear import (build_pair, coupling_closed_form, fit_cubic_exponent, good_n_sequence,
                        growth_witness, infinite_product_prefixes, qn_e1, s_recursion)
from .words import classify as classify_word, partition, check_partition

__all__ = [name for name in dir() if not name.startswith("_")]
