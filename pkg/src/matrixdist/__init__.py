"""Empirical matrix distributions of functions of two variables."""
from .errors import (DegenerateSpectrumError, DomainError, MatrixDistError, ParameterError,
                     UnsupportedSpaceError)
from .spaces_kernels import KernelSpec, MeasureSpaceSpec, kernel_eval, make_kernel, purity_check, space
from .grids import (GridSample, sample_bernoulli_grid, sample_grid, sample_locally_finite_grid,
                    sample_stationary_grid, sample_symmetric_grid)
from .matdist import (EmpiricalMatrixDistribution, SampleMatrix, aldous_distribution,
                      aldous_sample, compare_distributions, compare_grid_types, evaluate_matrix,
                      invariance_check, minor_statistics, random_graph_matrix, triangle_violations,
                      sample_matrix_distribution)
from .recovery import folner_average, recover_additive, validate_recovery
from .analysis import (entropy_profile, mm_entropy, semicircle_distance, spectral_dispersion,
                       spectrum)

__version__ = "0.1.0"
