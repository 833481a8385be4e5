"""Differentially private top-k selection.

The joint exponential mechanism (`run_joint`), its permute-and-flip variant
(`run_pnf_joint`), and the peeling baselines (`run_pnf_peel`,
`run_cdp_peel`).
"""

from dptopk.counts import (ItemCounts, SortedCounts, UserContribution,
                           add_user, load_counts, load_counts_file,
                           sort_counts)
from dptopk.errors import DomainError, OracleLimitError, ParseError
from dptopk.joint import (JointSampler, TopKSample, UtilityCell, run_joint,
                          utility_u_star)
from dptopk.metrics import ErrorReport, evaluate, utility_bound
from dptopk.noise import make_rng
from dptopk.peeling import (PrivacyBudget, cdp_epsilon_from_rounds,
                            cdp_rounds_from_epsilon, run_cdp_peel,
                            run_pnf_peel)
from dptopk.pnf_joint import PnfJointSampler, run_pnf_joint

__all__ = [
    "DomainError", "ErrorReport", "ItemCounts", "JointSampler",
    "OracleLimitError", "ParseError", "PnfJointSampler", "PrivacyBudget",
    "SortedCounts", "TopKSample", "UserContribution", "UtilityCell",
    "add_user", "cdp_epsilon_from_rounds", "cdp_rounds_from_epsilon",
    "evaluate", "load_counts", "load_counts_file", "make_rng", "run_cdp_peel",
    "run_joint", "run_pnf_joint", "run_pnf_peel", "sort_counts",
    "utility_bound", "utility_u_star",
]
