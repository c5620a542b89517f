"""First passage times of perpetuity sequences: large deviations, simulation and constants."""
from .cgf import (
    AsymptoticSummary,
    CgfProfile,
    RegimeReport,
    cgf_profile,
    legendre,
    rate_function,
    regime_report,
    solve_alpha,
    solve_xi,
    summarize,
)
from .errors import (
    CapabilityError,
    DegenerateFitError,
    DomainError,
    NoRootError,
    NoSolutionError,
    NumericEvaluationError,
    PerpetuityError,
    PreconditionError,
    SamplerStallError,
    UnsupportedFamilyError,
    ValidationError,
)
from .estimators import (
    Estimate,
    Prediction,
    TailFit,
    chebyshev_bound,
    estimate_C_tau,
    estimate_CM_cesaro,
    estimate_CM_goldie,
    petrov_tail,
    predict,
    prob_exceedance_forward,
    prob_passage,
    tail_fit,
)
from .model import PairLaw, build_law, check_assumptions, sample_pairs, scale_law
from .process import (
    first_passage,
    reversal_duality_check,
    risk_duality_check,
    simulate_path,
    simulate_risk,
)
from .tilt import TiltedLaw, likelihood_ratio, tilt

__version__ = "0.1.0"
