"""Numerics for the Lévy area of a two-dimensional fractional Brownian motion.

Special functions, kernels, closed-form integrals, quadrature, diagram
calculus, Gaussian path simulation and statistical analysis.
"""

__version__ = "0.1.0"

from .errors import *  # noqa: F401,F403
from .special_functions import hyp2f1, principal_power, gamma_real, rgamma  # noqa: F401
from .kernels import (ModelParams, kprime_pm, kprime_real, k_pm, k_real,  # noqa: F401
                      k_integrated_pm, k_integrated_real, kstar_pm, kstar_real,
                      basis_fk, basis_fk_matrix, series_truncation, fbm_covariance)
from .closed_form import (PowerPair, IntegralArgs, phi_block, i_minus, i_plus,  # noqa: F401
                          c_n_coeff, f_n_appendix)
from .quadrature import (integrate_1d, nystrom_operator, connected_moment_trace,  # noqa: F401
                         second_moment_direct)
from .diagrams import (enumerate_pairings, diagram_cycles, count_connected_diagrams,  # noqa: F401
                       cumulants_from_connected, moments_from_cumulants, wick_moment)
from .simulate import (TimeGrid, PathEnsemble, AreaSamples, sample_paths, levy_area,  # noqa: F401
                       overlap_covariance)
from .analysis import (c_irr, predicted_moment, fit_scaling, ScalingFit, TestReport,  # noqa: F401
                       ks_gaussian_test, independence_test, exp_moment_check, markov_tail_check)
