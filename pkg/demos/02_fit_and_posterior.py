# %% [markdown]
# # Fitting a label model and reading off probabilistic labels
#
# Sample votes from a model with one fixing dependency, fit it with and
# without that dependency, and compare the posteriors p(y = +1 | votes).

# %%
import numpy as np

from dpmisspec import ModelParams, DependencySpec, fit_exact, posterior, sample_exact
from dpmisspec.downstream import roc_auc
from dpmisspec.model import majority_vote

truth = ModelParams([0.9, 0.6, 0.4, 0.7, 0.3], [1.0], [DependencySpec(0, 1, "fixing")])
data = sample_exact(truth, 20000, seed=0)
data.labels[:5], data.truth[:5]

# %%
indep = fit_exact(data.labels)
dep = fit_exact(data.labels, truth.deps)
print("independent mu1:", np.round(indep.params.mu1, 3), "LL", round(indep.log_likelihood, 2))
print("with dep    mu1:", np.round(dep.params.mu1, 3), "mu2", np.round(dep.params.mu2, 3),
      "LL", round(dep.log_likelihood, 2))

# %% [markdown]
# The posterior is a sigmoid of a linear score, so it never needs the
# partition function.

# %%
for name, p in [("majority vote", majority_vote(data.labels)),
                ("independent", posterior(indep.params, data.labels)),
                ("with dep", posterior(dep.params, data.labels))]:
    print(f"{name:<14} AUC {roc_auc(p, data.truth):.4f}")
