"""Lower and upper bounds of Sobol' indices from Poincaré eigenbases and Fisher information."""

from __future__ import annotations

from .distributions import Distribution1D, beta, cauchy, gamma, gumbel, laplace, normal, triangular, uniform
from .errors import SobolBoundsError
from .estimators import (
    BoundEstimate,
    attach_ci,
    bootstrap_ci,
    dgsm,
    dgsm_upper,
    dgsm_upper_bound,
    fisher_lower_bound,
    gc_coefficients,
    gc_lower_bound,
    monomial_lower_bound,
    pdo_der_lower_bound,
    pdo_lower_bound,
    pick_freeze_total,
)
from .oracle import anova_decomposition, anova_oracle
from .sample import EvaluationSample, center, draw_sample, quadrature_sample
from .spectral import SpectralBasis, Weight, basis_for, closed_form_spectrum, eval_basis, poincare_constant, solve_spectrum
from .testfunctions import ModelFunction, analytic_indices, flood_model, g_sobol, linear_interaction, polynomial

__version__ = "0.1.0"
