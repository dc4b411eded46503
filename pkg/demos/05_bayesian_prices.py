# # Posted prices from a prior
#
# When valuations come from known independent distributions, set each
# price to half the expected contribution of the item to an optimal
# allocation, estimated from ghost samples.  Fresh bidders then buy at
# those fixed prices.

# %%
from bca import BidderDistribution, DistributionSpec, estimate_prices, evaluate_guarantee

dist = DistributionSpec(4, tuple(BidderDistribution("additive-iid-weights", {}, ("uniform", 0, 16))
                                 for _ in range(3)))
est = estimate_prices(dist, "exact", k=300, seed=0)
print("prices:", est.prices.round(3), "+/-", est.stderr.round(3))

# %%
rep = evaluate_guarantee(dist, "exact", k_prices=300, trials=1000, seed=0, prices=est.prices)
print(f"mechanism {rep.mech_mean:.3f}, optimum {rep.alg_mean:.3f}, ratio {rep.ratio:.3f}")
print("quarter guarantee holds:", rep.holds())
