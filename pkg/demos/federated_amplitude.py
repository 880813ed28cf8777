"""
Many edge points and the amplitude knob
=======================================

With L edge points transmitting at once the signals add up in the air and the
channel adds a single noise term. Seen from the analyst this is one dataset of
L n0 samples with noise sigma/L, so more edge points means less relative noise.
"""

from ota_ada import bounds
from ota_ada.bounds import SystemConfig

acc = bounds.AccuracySpec(0.1, 0.05)

# %%
# Fix sigma/A_t = 0.5. Below about 30 edge points the noise is too strong for
# even one accurate answer.
for L in (1, 10, 29, 30, 50, 100, 300):
    eq = bounds.to_equivalent(SystemConfig(n0=10_000, L=L, sigma_ch=0.5))
    b = bounds.k_budget(eq.sigma_eq_normalized, eq.n_eq, acc)
    print(f"L = {L:>3}  sigma_eq/A_t = {eq.sigma_eq_normalized:.4f}  k = {b.k:.4g}")

# %%
# With a fixed amplitude the budget soon stalls, because the noise is no longer
# the limiting factor. Retuning A_t so that sigma_eq/A_t stays at s_opt keeps
# it growing. The best amplitude falls like 1/L.
for L in (30, 60, 120, 240, 480):
    cfg = SystemConfig(n0=10_000, L=L, sigma_ch=0.5)
    a = bounds.optimal_amplitude(cfg, acc)
    opt = bounds.to_equivalent(SystemConfig(n0=10_000, L=L, sigma_ch=0.5, A_t=a))
    fixed = bounds.to_equivalent(cfg)
    print(f"L = {L:>3}  A_t_opt = {a:.4f}  "
          f"k_opt = {bounds.k_budget(opt.sigma_eq_normalized, opt.n_eq, acc).k:.4g}  "
          f"k_fixed = {bounds.k_budget(fixed.sigma_eq_normalized, fixed.n_eq, acc).k:.4g}")
