"""Spectral determinants of flat tori, tied to modular forms and elliptic periods."""

from . import cy, degeneration, exceptions, kronecker, modular, torus, zeta
from .cy import (
    ChernData,
    CurvatureInputs,
    b1_from_trace,
    calabi_identity_residual,
    conjectured_coefficients,
    cy3_heat_coefficients,
    gilkey_a_minus1,
)
from .degeneration import (
    GrowthLaw,
    MonodromyMatrix,
    PeriodPair,
    boundary_growth_fit,
    equianharmonic_period,
    hypergeometric_2f1_half,
    legendre_periods,
    monodromy_around,
)
from .exceptions import EtaLabError
from .kronecker import (
    ExponentFit,
    KroneckerRecord,
    analytic_discriminant_l2,
    fit_kronecker_exponents,
    kronecker_compare,
    kronecker_report,
    l2_norm_holomorphic_form,
    wp_curvature_check,
)
from .modular import (
    algebraic_discriminant_lambda,
    covering_j_from_lambda,
    discriminant_modular,
    eisenstein_g2,
    eisenstein_g3,
    eta,
    j_invariant,
    lambda_function,
    reduce_to_fundamental_domain,
    theta_constants,
)
from .torus import (
    Normalization,
    SpectrumSlice,
    TauPoint,
    TraceFunction,
    eigenvalues,
    heat_trace,
    heat_trace_direct,
    heat_trace_poisson,
    torus_trace,
    trace_from_eigenvalues,
)
from .zeta import (
    AsymptoticExpansion,
    ZetaResult,
    a0_constancy_scan,
    epstein_zeta,
    extract_heat_coefficients,
    mellin_b_coefficients,
    regularized_determinant_epstein,
    regularized_determinant_mellin,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
