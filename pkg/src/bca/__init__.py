"""Truthful posted-price mechanisms for liquid welfare with budget-constrained bidders."""
from .valuations import (XOS, Additive, AdditiveClause, Bidder, Capped, ClassReport, Coverage,
                         Instance, ItemSet, SizeLimitError, Table, UniverseError, Valuation,
                         check_class, liquid, liquid_xos_clause, xos_clause)
from .demand import QueryCounter, bc_demand_query, demand_query, verify_bcdq_lemma
from .engine import (CoinStream, Outcome, Step, Welfare, doubling, fixed_price_auction, no_update,
                     outcome_welfare, run_posted_price)
from .oracles import (DeviationReport, OptResult, audit_truthfulness, check_fixed_price_lemma,
                      deviation_family, opt_value, opt_welfare, strongly_profitable,
                      supporting_prices, UnsupportedPricesError)
from .kv import (KvConfig, check_kv_lemmas, compute_L, default_q, kv_mechanism, run_kv,
                 run_kv_overselling)
from .cm import (CmConfig, GreedyResult, cm_bound, cm_mechanism, greedy_alloc,
                 measure_competitiveness, run_cm, split_bidders)
from .bayes import (BidderDistribution, DistributionSpec, PriceEstimate, estimate_prices,
                    evaluate_guarantee, fixed_price_mechanism, lw_contributions, point_mass,
                    run_bayes)
from .generators import gen_instance, footnote_demo
from .harness import (ExperimentSpec, FormatError, ResultRow, load_distribution, load_instance,
                      run_experiment, save_distribution, save_instance)

__version__ = "0.1.0"
