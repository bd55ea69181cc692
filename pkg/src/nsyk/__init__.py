"""Singular-value chaos diagnostics for the sparse non-Hermitian SYK model."""

__version__ = "0.1.0"

from .couplings import ModelConfig, CouplingRealization, assemble_hamiltonian, sample_couplings
from .majorana import MajoranaSet, build_majoranas, parity_operator, project_to_sector
from .spectral import (SingularSpectrum, hermitize, sign_align, singular_values,
                       singular_values_hermitized, svd_factors)
from .spacing import ensemble_mean_r, spacing_histogram, spacing_ratios
from .form_factor import (default_alpha, fit_ramp, fit_thouless_scaling, linear_grid, log_grid,
                          sigma_ff, thouless_time)
from .complexity import complexity_plateau, singular_complexity, verify_derivative_identity
from .rmt import EnsembleClass, reference_spacing_curve, sample_gaussian_matrix
