"""
Overfitting a small dataset
===========================

An analyst who sees exact answers can build a query that looks very different
on the dataset than on the population. It asks random 0/1 probes, keeps the
ones whose answers came back above 1/2, and asks their majority vote.
"""

import numpy as np

from ota_ada.analyst_harness import AnalystPolicy, SimTemplate, evaluate_accuracy
from ota_ada.bounds import SystemConfig
from ota_ada.federated_sim import Population

pop = Population.uniform(10_000)
attack = AnalystPolicy("overfit_attack")

# %%
# 100 samples, 300 probes plus the final query, no noise: the last answer
# lands far from the truth.
rep = evaluate_accuracy(attack, SimTemplate(pop, SystemConfig(n0=100, sigma_ch=0.0)),
                        k=301, alpha=0.1, trials=20, master_seed=0)
print("mean gap of the final query:", np.mean(rep.final_gaps))

# %%
# Channel noise hides the signs of the probe answers. The gap of the final
# query shrinks as the noise grows (the failure rate itself is also driven by
# the noise once it reaches alpha).
for sigma in (0.0, 0.002, 0.02, 0.2):
    rep = evaluate_accuracy(attack, SimTemplate(pop, SystemConfig(n0=100, sigma_ch=sigma)),
                            k=301, alpha=0.1, trials=20, master_seed=0)
    print(f"sigma = {sigma:<6} mean final gap = {np.mean(rep.final_gaps):.3f}  "
          f"failure rate = {rep.failure_rate:.2f}")
