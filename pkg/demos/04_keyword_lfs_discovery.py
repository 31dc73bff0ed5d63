# %% [markdown]
# # Keyword LFs on text and dependency discovery
#
# A toy review corpus, three keyword LFs, and the strength score of each
# candidate dependency against the true labels.

# %%
import numpy as np

from dpmisspec.discovery import rank_dependencies, select_top_d
from dpmisspec.ingestion import KeywordLF, apply_keyword_lfs

docs = [
    "well worth watching", "it was not worth it", "not worth the ticket price",
    "worth every penny", "great fun, worth it", "boring and not worth your time",
    "a great cast", "not great, not worth it", "worth a second look", "great, great film",
] * 3
truth = np.array([1, -1, -1, 1, 1, -1, 1, -1, 1, 1] * 3)
lfs = [KeywordLF("worth", "worth", 1), KeywordLF("not worth", "not worth", -1),
       KeywordLF("great", "great", 1)]
votes = apply_keyword_lfs(docs, lfs)
votes[:10]

# %% [markdown]
# "worth" fires inside every "not worth" document and is wrong there; the
# fixing kind (the second LF corrects the first) picks this up.

# %%
ranked = rank_dependencies(votes, truth)
names = [lf.name for lf in lfs]
for score in ranked.rows():
    if score.value:
        s = score.spec
        print(f"{names[s.j]:>10} | {names[s.k]:<10} {s.kind.value:<12} {score.value:4d}")

# %%
select_top_d(ranked, 1)
