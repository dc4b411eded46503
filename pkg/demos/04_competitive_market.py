# # Pricing off one half of a competitive market
#
# Split the bidders at random.  Run greedy on one half to find what each
# item is worth, post those contributions divided by 2 beta to the other
# half, and sell at fixed prices.  This works when removing half the
# bidders rarely destroys much of the optimum.

# %%
import numpy as np

from bca import (CmConfig, CoinStream, cm_bound, gen_instance, measure_competitiveness,
                 outcome_welfare, run_cm)

market = gen_instance("clone-market", {"archetypes": 2, "copies": 3, "m": 4}, seed=11)
comp = measure_competitiveness(market, eps=0.2, trials=1000, seed=0)
print(f"OPT = {comp.opt:g}, delta_hat = {comp.delta_hat:.3f}, 95% CI {np.round(comp.interval, 3)}")

# %%
o = run_cm(market, CmConfig(beta=2.0), CoinStream(1))
print("pricing side:", o.meta["S"], "buying side:", o.meta["T"])
print("posted prices:", np.round(o.meta["prices"], 3))

# %%
lws = np.array([outcome_welfare(market, run_cm(market, CmConfig(2.0), CoinStream(s))).lw
                for s in range(1000)])
bound = cm_bound(0.2, min(comp.interval[1], 0.5), 2.0)
print(f"mean lw {lws.mean():.3f} vs guaranteed {bound:.4f} x OPT = {bound * comp.opt:.3f}")
