"""Hüsler-Reiss extremal graphical models.

Variogram/precision transforms, variogram matrix completion on graphs,
exact sampling, empirical estimators and a scikit-learn style estimator.
"""

from .completion import (CompletionReport, Diagnosis, PartialVariogram, complete,
                         complete_block, complete_decomposable, complete_general,
                         complete_two_clique, detect_noncompletable, kl_divergence,
                         restrict_to_graph)
from .data import ExceedanceSample
from .density import (check_mle_stationarity, density_constants, log_lambda_anchor,
                      log_lambda_theta, log_mass_L, pareto_loglik, surrogate_loglik)
from .estimation import (EmpiricalVariogram, cliquewise_variogram, empirical_chi,
                         empirical_variogram, fit_graph_structured, learn_tree, mse,
                         rank_transform)
from .estimators import EmpiricalMarginTransformer, HuslerReissGraphical
from .graph import (UndirectedGraph, clique_ordering, decomposable_cover, is_block_graph,
                    is_connected, is_decomposable, maximal_cliques,
                    maximum_cardinality_search, minimum_spanning_tree)
from .linalg import (centering_projector, check_precision, check_variogram,
                     log_pseudo_determinant, pseudo_determinant, pseudo_inverse)
from .simulation import (SamplerConfig, estimate_exceedance_mass, random_variogram,
                         sample_anchor, sample_degenerate_gaussian, sample_pareto)
from .transforms import (chi_of_gamma, gamma_of, gamma_of_chi, gamma_of_theta, sigma_k,
                         sigma_of, theta_limit, theta_of, theta_via_anchor)

__version__ = "0.1.0"
