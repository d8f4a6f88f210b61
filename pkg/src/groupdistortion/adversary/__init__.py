"""Adversaries: lower-bound families, worst groupings and worst consistent metrics."""

from .families import (
    FAMILIES,
    FAMILY_MECHANISM,
    ORDINAL_FAMILIES,
    LowerBoundInstance,
    gen_full_avgmax_asym,
    gen_full_avgmax_symmetric,
    gen_full_maxavg,
    gen_ordinal_avgmax_asym,
    gen_ordinal_avgmax_symmetric,
    gen_ordinal_maxavg,
    generate,
)
from .grid import GridBudgetExceeded, grid_worst_metric
from .metric_lp import LPAudit, LPBudgetExceeded, LPInfeasible, MetricLP, build_lp, lp_worst_metric
from .partitions import (
    EnumerationBudgetExceeded,
    count_equal_partitions,
    equal_partitions,
    set_partitions,
    stirling2,
    worst_grouping,
)
