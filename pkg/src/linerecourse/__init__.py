"""Online minimum-cost matching on the line with recourse.

Exact (rational) simulators for the t-net-cost matchers, the
constant-competitive recourse algorithm, the freeze-after-k algorithm for
alternating instances, and the experiment harness around them.
"""

from linerecourse.line_model import (
    AltPath,
    Instance,
    Matching,
    SymDiffComponent,
    dist,
    matching_cost,
    parse_rat,
    sym_diff_decompose,
    validate_instance,
)
from linerecourse.alternating import AltState, min_k, run_alternating
from linerecourse.opt_oracle import OptResult, opt_brute, opt_dp, opt_prefix
from linerecourse.recourse import RecourseState, run_recourse
from linerecourse.tnet_runner import InvariantViolation, RunnerState, arrive_tnet, run_offline, run_online
from linerecourse.tnet_search import (
    PathSearch,
    co_net_cost,
    min_aug_path,
    search_interval,
    t_net_cost,
)

__version__ = "0.1.0"

__all__ = [
    "AltPath",
    "AltState",
    "Instance",
    "InvariantViolation",
    "Matching",
    "OptResult",
    "PathSearch",
    "RecourseState",
    "RunnerState",
    "SymDiffComponent",
    "arrive_tnet",
    "co_net_cost",
    "dist",
    "matching_cost",
    "min_aug_path",
    "min_k",
    "opt_brute",
    "opt_dp",
    "opt_prefix",
    "parse_rat",
    "run_alternating",
    "run_offline",
    "run_online",
    "run_recourse",
    "search_interval",
    "sym_diff_decompose",
    "t_net_cost",
    "validate_instance",
]
