# %% [markdown]
# # Dependency factors, one table per kind
#
# Each labeling function (LF) votes -1, 0 (abstain) or +1. A pairwise
# dependency factor looks at two votes and the true label and returns -1, 0
# or +1. Printing the full 18-row table per kind is the quickest way to see
# what each kind rewards.

# %%
import itertools

import numpy as np

from dpmisspec.factors import ALL_KINDS, label_flip_constant, pair_factor

combos = np.array(list(itertools.product((-1, 0, 1), (-1, 0, 1), (-1, 1))))
lj, lk, y = combos.T

# %%
header = "lam_j lam_k  y  " + " ".join(f"{k.value[:5]:>6}" for k in ALL_KINDS)
print(header)
table = np.column_stack([pair_factor(k, lj, lk, y) for k in ALL_KINDS])
for row, vals in zip(combos, table):
    print(f"{row[0]:5d} {row[1]:5d} {row[2]:2d}  " + " ".join(f"{v:6d}" for v in vals))

# %% [markdown]
# Flipping y changes a factor by at most this much. Kinds with a constant of
# 2 move the posterior logit twice as far per unit weight as kinds with 1.

# %%
for kind in ALL_KINDS:
    print(f"{kind.value:<12} {label_flip_constant(kind)}")
