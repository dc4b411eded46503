# # Demand queries with and without a budget
#
# A demand query asks a bidder for its favourite bundle at posted prices.
# The budget-constrained version only considers bundles it can pay for.
# On the two-item example from the valuation demo they disagree.

# %%
from bca import ItemSet, bc_demand_query, demand_query, footnote_demo, liquid, verify_bcdq_lemma

inst = footnote_demo()
bidder = inst.bidders[0]
U = ItemSet.full(2)
prices = (2, 1)

# %%
S = bc_demand_query(bidder.valuation, U, prices, bidder.budget)
print("budget-constrained demand:", S.members)  # (0,): a at price 2, utility 8

# %%
T = demand_query(liquid(bidder), U, prices)
print("demand for the liquid valuation:", T.members)  # (1,): b, liquid utility 1

# %% [markdown]
# Asking about the liquid valuation hands out the wrong item.  The
# budget-constrained answer is nonetheless a good set for the liquid
# objective: both inequalities below hold against every alternative T.

# %%
rep = verify_bcdq_lemma(bidder.valuation, bidder.budget, U, prices)
print("passed:", rep.passed, "subsets checked:", rep.checked)
