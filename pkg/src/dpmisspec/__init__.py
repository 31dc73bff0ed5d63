"""Label models with higher-order LF dependencies and misspecification bounds."""

from .bounds import (BoundReport, bound_report, empirical_kl, empirical_max_posterior_gap,
                     kl_bound, noise_aware_risk_bound, posterior_bound, risk_gap_bound)
from .factors import (ALL_KINDS, DependencyKind, DependencySpec, accuracy_factor,
                      dependency_factor, factor_vector)
from .fit import FitConfig, FitReport, fit, fit_exact, fit_gibbs
from .model import (ENUM_CAP, ModelParams, grad_log_marginal_likelihood, joint_prob,
                    log_marginal_likelihood, marginal_prob, partition_function, posterior,
                    unnormalized_log_joint)
from .sampling import SyntheticDataset, gibbs_sample, sample_exact

__version__ = "0.1.0"
