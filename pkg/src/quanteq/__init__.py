"""quanteq: Nash equilibria of the quadratic cheap-talk quantizer game.

An encoder observing a continuous source reports one of N intervals; a
decoder replies with an action. With quadratic costs offset by a bias b,
every equilibrium is a quantizer whose edges and centroids are mutual best
responses. This package computes, verifies and tabulates those equilibria
for exponential, Gaussian, uniform and user-supplied log-concave sources.
"""

from .bounds import (TailAssumptions, empirical_nmax, exponential_thresholds,
                     gaussian_halfline_bound, general_noninformative,
                     general_semi_unbounded_bound, nmax_uniform,
                     noninformative_semi_unbounded)
from .costs import (CostReport, decoder_cost, encoder_cost_by_integration,
                    informativeness_table)
from .distributions import (CustomDensity, Exponential, Gaussian,
                            LogConcavityReport, SourceDistribution,
                            SupportSpec, TruncatedMoment, Uniform, cdf,
                            log_concavity_check, pdf, truncated_moment)
from .equilibrium import (EquilibriumResult, EquilibriumStatus, GameConfig,
                          Quantizer, UniquenessReport, babbling_equilibrium,
                          decoder_best_response, encoder_best_response,
                          fixed_point_residuals, lloyd_max_step,
                          quantizer_from_edges, solve_lloyd_max,
                          solve_shooting, uniqueness_probe)
from .errors import (BinCollapse, DomainError, NoEquilibrium,
                     NonPositiveDensity, PropagationFailure, QuantEqError,
                     ZeroMassInterval)
from .exponential import (RecursionState, backward_recursion, g, h,
                          infinite_bin_length, infinite_cost, lambert_w,
                          nmax_exponential, two_bin_edge)
from .oracle import (GridSearchSpec, brute_force_equilibrium,
                     brute_force_two_bin, comparison_matrix,
                     uniform_closed_form)

__version__ = "0.1.0"
