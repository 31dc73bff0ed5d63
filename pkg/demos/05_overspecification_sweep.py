# %% [markdown]
# # Modeling more dependencies than the data has
#
# The ground truth is an independent model. Each sweep point models the top-d
# dependencies per kind (ranked against true labels on the training half),
# fits the label model, trains a small network on its posteriors, and scores
# it on the held-out half. Runs take about half a minute at this size.

# %%
import numpy as np
from scipy.stats import spearmanr

from dpmisspec.harness import SweepConfig, run_sweep

cfg = SweepConfig(m=10, n=10000, d_values=[0, 1, 3, 5, 10, 20], runs=5, seed=0)
records = run_sweep(cfg, progress=print)

# %% [markdown]
# The learned dependency strength grows with d while the downstream AUC does
# not improve on the independent baseline at d = 0.

# %%
print("d    n_deps  |mu2|_1   bound    gap      auc")
for r in records:
    print(f"{r.d:<4} {r.n_deps:<7} {r.mu2_l1:<8.3f} {r.posterior_bound:<8.3f} {r.empirical_gap:<8.4f} "
          f"{r.auc_mean:.4f} +- {r.auc_std:.4f}")
print("Spearman(d, |mu2|_1) =", spearmanr([r.d for r in records], [r.mu2_l1 for r in records]).statistic)
