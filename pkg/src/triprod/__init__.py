"""Numerical invariant triple products on the hyperbolic groups SO(d,1).

The package provides the explicit matrix model with its Iwasawa
factorization (:mod:`triprod.lorentz`), the orbit-structure computations
(:mod:`triprod.orbits`), log-space special functions
(:mod:`triprod.gammafn`), the quadrature and Haar Monte Carlo engine
(:mod:`triprod.quadrature`), the reduced triple-product integrals with
their identity suites (:mod:`triprod.triple`) and a verification CLI
(:mod:`triprod.cli`).
"""

from .config import TOLERANCES, Tolerances
from .lorentz import (Dimension, GroupElement, IwasawaFactors, a_power,
                      class_one, embed_k, identity, iwasawa, j_metric,
                      k_action, make_a, make_n, random_element, reassemble,
                      weyl_w0)
from .orbits import AdjointRankReport, am_tangent_rank, open_orbit_count
from .gammafn import (GammaPoleError, SpectralTriple, asymptotic_envelope,
                      gamma_ratio, log_gamma, stirling_abs)
from .quadrature import (QuadResult, QuadratureError, TruncationSpec,
                         haar_sample_k, integrate_1d, integrate_2d,
                         integrate_triple, mc_integrate_k)
from .triple import (AbcParams, ConvergenceError, IdentityReport,
                     asymptotic_slope_test, c_n, i_n, i_n_prime, integrand,
                     lemma12_check, recursion_suite, t_st_closed_ratio_test,
                     t_st_numeric)

__version__ = "0.1.0"

__all__ = [
    "TOLERANCES", "Tolerances",
    "Dimension", "GroupElement", "IwasawaFactors", "a_power", "class_one",
    "embed_k", "identity", "iwasawa", "j_metric", "k_action", "make_a",
    "make_n", "random_element", "reassemble", "weyl_w0",
    "AdjointRankReport", "am_tangent_rank", "open_orbit_count",
    "GammaPoleError", "SpectralTriple", "asymptotic_envelope", "gamma_ratio",
    "log_gamma", "stirling_abs",
    "QuadResult", "QuadratureError", "TruncationSpec", "haar_sample_k",
    "integrate_1d", "integrate_2d", "integrate_triple", "mc_integrate_k",
    "AbcParams", "ConvergenceError", "IdentityReport",
    "asymptotic_slope_test", "c_n", "i_n", "i_n_prime", "integrand",
    "lemma12_check", "recursion_suite", "t_st_closed_ratio_test",
    "t_st_numeric",
]
