# # Valuations, budgets and liquid values
#
# A bidder has a monotone set function v over the items and a budget B.
# What the bidder can actually "bring to the table" is the liquid value
# min(v(S), B).  This script builds the three valuation families, caps them,
# and checks which set-function classes survive the cap.

# %%
from bca import XOS, Additive, Bidder, Coverage, ItemSet, check_class, liquid, liquid_xos_clause

# %% [markdown]
# Two items, a = 0 and b = 1.  Item a is worth 10 on its own and adds
# nothing to b; item b is worth 2.  The budget is 2.

# %%
v = XOS(((10, 0), (0, 2)))
b = Bidder(v, 2)
vbar = liquid(b)
for S in ([0], [1], [0, 1]):
    T = ItemSet.of(S, 2)
    print(f"v({S}) = {v.value(T):g}, liquid = {vbar.value(T):g}")

# %% [markdown]
# With the cap in place a and b look identical, even though the bidder
# strictly prefers a.  That is the whole difficulty with budgets.
#
# Capping keeps coverage functions submodular, and every capped XOS
# function still has additive clauses that are tight on a chosen set.

# %%
cov = Coverage((frozenset({0, 1}), frozenset({1, 2}), frozenset({2})), (1, 2, 3))
for B in (0, 2, 4, 100):
    print(f"B={B:>3}: submodular={bool(check_class(liquid(Bidder(cov, B)), 'submodular'))}")

# %%
clause = liquid_xos_clause(Additive((4, 3, 2)), 5, ItemSet.full(3))
print("prefix-capped clause for B=5:", clause.weights)  # (4, 1, 0)

# %% [markdown]
# Not every XOS function is submodular: with clauses (1,0,0) and (0,1,1)
# item 2 adds nothing to {0} but 1 to {0, 1}.

# %%
rep = check_class(XOS(((1, 0, 0), (0, 1, 1))), "submodular")
print(rep.holds, [list(x) for x in rep.witness])
