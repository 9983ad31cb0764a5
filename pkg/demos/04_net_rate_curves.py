# %% [markdown]
# # Net rate of optimal, full and random pilot reuse
#
# The optimal scheme picks the best vector for each coherence interval; full
# reuse always uses K pilots; the random baseline gives every cell K pilots
# drawn from as many as the optimal scheme uses.

# %%
from pilotreuse import FadingParams, build_curve, build_lattice, estimate_depth_rates
from pilotreuse.netrate import MonteCarloConfig, ncoh_grid

lattice = build_lattice(4, 1600.0)
params = FadingParams()
rates = estimate_depth_rates(lattice, params, trials=50_000, seed=20160401).rates

# %%
grid = ncoh_grid(1)
mc = MonteCarloConfig(trials=5000, seed=1)
curves = {s: build_curve(s, "c_net", grid, 1, rates, lattice, params, mc) for s in ("optimal", "full_reuse", "random")}
for n in (5, 10, 20, 40, 80, 160):
    i = grid.index(n)
    row = "  ".join(f"{s} {curves[s].values[i]:6.2f}" for s in curves)
    print(f"N_coh={n:3d}  {row}  N_pil={curves['optimal'].npil[i]}")

# %%
# Net rate per coherence symbol peaks at N_coh / K = 2 under full reuse, for any K.
for k in (1, 2, 14):
    curve = build_curve("full_reuse", "c_net_per_ncoh", ncoh_grid(k), k, rates)
    print(k, curve.argmax_x())
