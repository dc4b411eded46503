# # Auditing truthfulness
#
# For a fixed coin realization a bidder should never gain by misreporting
# its valuation or budget.  The audit replays the mechanism with the same
# coins under scaled valuations, dropped XOS clauses and budget
# misreports, and reports the best gain found.

# %%
from bca import (Additive, Bidder, CmConfig, Instance, KvConfig, audit_truthfulness, cm_mechanism, gen_instance, kv_mechanism,
                 run_kv)

inst = gen_instance("xos", {"n": 3, "m": 4}, seed=5)
kv = kv_mechanism(KvConfig.for_instance(inst, q=0.5))
cm = cm_mechanism(CmConfig(2.0))
for name, mech in (("kv", kv), ("cm", cm)):
    for i in range(inst.n):
        rep = audit_truthfulness(mech, inst, i, seed=7)
        print(f"{name} bidder {i}: {rep.tested} deviations, max gain {rep.max_gain:.2e}")

# %% [markdown]
# L must be fixed before reports arrive.  Recomputing it from the reports
# lets the strongest bidder lower its own starting prices.

# %%
def leaky(instance, coins):
    return run_kv(instance, KvConfig.for_instance(instance, q=1.0), coins)


strong = Instance(2, (Bidder(Additive((8, 8)), 100), Bidder(Additive((1, 1)), 100)))
rep = audit_truthfulness(leaky, strong, 0, seed=7)
print("report-dependent L:", rep.max_gain, rep.witness)
