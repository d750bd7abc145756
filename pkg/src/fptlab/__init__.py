"""First passage times of Brownian motion through moving boundaries.

Curve transforms and their clocks, the Sturm-Liouville bridge, Airy-series
and transformed densities, Monte Carlo and Gauss-Markov simulation, and the
absorbed heat equation with its Lie symmetries.
"""

from ._version import __version__
from .curves import (Curve, DomainInfo, TransformParams, affine, compose_params, constant,
                     curve_from_spec, from_callable, horizon_info, normalize_sign, pi, power_law,
                     quadratic, rho_tau, s_transform, shifted_quadratic, sigma, tabulated, tau)
from .densities import (FptDensity, affine_density, density_for_curve, drift_shift_density,
                        empirical_density, groeneboom_density, shifted_quadratic_density,
                        transform_density, transformed_shifted_quadratic)
from .errors import (ConsistencyError, DomainError, FptError, NumericError, ParameterError,
                     SpecError, UnsupportedRegimeError)
from .gauss_markov import (GaussMarkovSpec, HFactor, h_factor_eval, ht_density_relation_check,
                           martingale_check, sample_gm, simulate_gm, time_change_fpt)
from .heat import (GridFunction, bvp_symmetry_check, extract_density, gaussian_kernel,
                   heat_residual, lie_composition, lie_transform, solve_bvp, two_param_transform)
from .montecarlo import FptSampleSet, ks_distance, simulate_fpt
from .ode_bridge import (MeasureDensity, constant_measure, decompose_solution, measure_from_spec,
                         nonlinear_residual, power_law_solution, rational_measure, solve_nonlinear,
                         solve_sl, tabulated_measure)
from .special import airy, airy_ai, airy_ai_prime, airy_zeros

__all__ = [name for name in dir() if not name.startswith("_")] + ["__version__"]
