"""
One edge point, one channel
===========================

Simulate the answering loop directly: the edge point sends A_t times its
empirical answer, the channel adds Gaussian noise, and the analyst rescales.
"""

import numpy as np

from ota_ada import bounds
from ota_ada.analyst_harness import AnalystPolicy, SimTemplate, evaluate_accuracy, make_random_query
from ota_ada.federated_sim import (
    ChannelModel,
    Population,
    empirical_answer,
    sample_dataset,
    transmit_p2p,
    true_answer,
)

rng = np.random.default_rng(0)
pop = Population.uniform(10_000)
ds = sample_dataset(pop, 5_000, rng)
q = make_random_query(pop.domain_size, rng)

# %%
# One query, three views of its answer.
ch = ChannelModel(sigma_ch=0.01, rng=1)
print("true     ", true_answer(pop, q))
print("empirical", empirical_answer(ds, q))
print("received ", transmit_p2p(ds, q, A_t=1.0, ch=ch))

# %%
# Calibrate the noise with the bounds and check the accuracy guarantee
# empirically over repeated sessions.
acc = bounds.AccuracySpec(0.1, 0.05)
n = 100_000
s = bounds.s_opt(n, acc)
k = bounds.k_budget(s, n, acc).k_floor
cfg = bounds.SystemConfig(n0=n, sigma_ch=s)
report = evaluate_accuracy(AnalystPolicy("random_nonadaptive"), SimTemplate(pop, cfg),
                           k, acc.alpha, trials=50, master_seed=3)
print(f"k = {k}, failure rate {report.failure_rate:.3f}, 95% interval {report.wilson_interval}")
