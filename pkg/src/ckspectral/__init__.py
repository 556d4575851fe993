"""Spectral triples on Cuntz-Krieger algebras via topological Markov chains."""

from .errors import CapacityError, ConvergenceError, InsufficientDepthError, PoleError
from .markov import (AdjacencyMatrix, MetricParams, PerronFrobeniusData, ahlfors_constant,
                     annulus_integral, format_word, metric_params, parry_measure, parse_word,
                     perron_frobenius, transition_matrix, ultrametric_distance)
from .groupoid import BisectionIndex, WaveletIndex, compose, enumerate_index_set, invert
from .wavelets import HaarBasis, build_basis, node_wavelets
from .laplacian import eigenvalue_closed_form, laplacian_matrix, spectrum_table
from .operators import (TruncatedOperator, TruncationWindow, ck_relation_residual, dirac_matrix,
                        generator_matrix, laplacian_window)
from .heat import heat_coefficients, heat_matrix_general, kernel_heat_matrix, kernel_threshold
from .isometry import GraphAutomorphism, IsometryElement, aut_group, is_in_G_A, unitary_U_u

__version__ = "0.1.0"
