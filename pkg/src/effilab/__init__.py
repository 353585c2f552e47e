"""effilab — numerical laboratory for higher-order efficiency of the
location MLE: density functionals, quantile/envelope expansions, the
Neyman-Pearson threshold system, and Monte Carlo verification."""

from .densities import Family, LocationDensity, gumbel_min, logistic, normal
from .errors import (BracketError, EffilabError, NumericalError,
                     SimulationError, VerificationError)
from .expansions import (DeficiencyReport, cf_quantile, deficiency,
                         epsilon_tilde, quantile_recentering,
                         std_normal_quantile, third_order_term)
from .functionals import (DEFAULT_QUADRATURE, DependenceResidual, DomainMap,
                          EtaSet, IdentityResiduals, QuadratureSpec, cs_gap,
                          cs_dependence_residual, eta_set, expectation,
                          fisher_information, identity_suite,
                          third_order_coeff)
from .mle_simulator import (IntervalCheck, SimConfig, SimResult,
                            empirical_quantile, gumbel_closed_form,
                            interval_check, mle_fit, simulate)
from .np_envelope import NPSolution, llr_pair_sample, solve_epsilon

__version__ = "0.1.0"

__all__ = [
    "Family", "LocationDensity", "gumbel_min", "normal", "logistic",
    "EffilabError", "NumericalError", "BracketError", "SimulationError",
    "VerificationError",
    "DomainMap", "QuadratureSpec", "DEFAULT_QUADRATURE", "EtaSet",
    "IdentityResiduals", "DependenceResidual",
    "expectation", "fisher_information", "eta_set", "identity_suite",
    "cs_gap", "third_order_coeff", "cs_dependence_residual",
    "std_normal_quantile", "cf_quantile", "quantile_recentering",
    "epsilon_tilde", "third_order_term", "deficiency", "DeficiencyReport",
    "NPSolution", "llr_pair_sample", "solve_epsilon",
    "SimConfig", "SimResult", "IntervalCheck", "mle_fit",
    "gumbel_closed_form", "simulate", "empirical_quantile", "interval_check",
    "__version__",
]
