"""
A tour of the query budget
==========================

How many statistical queries can be answered accurately when the answers
pass through a Gaussian channel? This script walks from g(c) to the budget
k = min(k1, k2) and the noise level that maximizes it.
"""

import numpy as np

from ota_ada import bounds

acc = bounds.AccuracySpec(alpha=0.1, beta=0.05)

# %%
# g(c) is the minimum over lambda of (c - log(1 - lambda)) / lambda. It starts
# at 1 for tiny c and becomes almost linear past c = 10.
for c in (1e-6, 0.1, 1.0, 10.0, 100.0, 1e4):
    print(f"g({c:g}) = {bounds.g(c):.6g}")

# %%
# k1 needs n alpha^2 beta / 2 > 1 (g never goes below 1), so small datasets
# have no leakage-limited budget at all.
print("smallest n with a budget:", bounds.min_dataset_size(acc))

# %%
# Sweep the normalized noise sigma/A_t at n = 10^6. Too little noise leaks
# the dataset (k1 binds), too much noise swamps the answers (k2 binds).
n = 10**6
for ratio in np.linspace(0.004, 0.02, 9):
    b = bounds.k_budget(ratio, n, acc)
    print(f"sigma/A_t = {ratio:.4f}  k = {b.k:12.4g}  ({b.regime})")

# %%
# The best ratio is where k1 meets k2.
s = bounds.s_opt(n, acc)
print(f"s_opt({n}) = {s:.5f}, k_max = {bounds.k_budget(s, n, acc).k:.4g}")
print(f"k drops below one past sigma/A_t = {bounds.k2_threshold_sigma(acc):.5f}")

# %%
# k_max grows roughly like n^2.
for n in (10**5, 10**6, 10**7):
    s = bounds.s_opt(n, acc)
    print(f"n = {n:>9}  s_opt = {s:.5f}  k_max = {bounds.k_budget(s, n, acc).k:.4g}")
