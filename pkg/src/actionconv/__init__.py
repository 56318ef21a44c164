"""Profile-based similarity metrics for finite operators and graphs.

The package represents finite P-operators (matrices acting on weighted
probability spaces by v -> vA), samples their k-profiles, compares them with
exact Levy-Prokhorov / Hausdorff metrics and the truncated profile metric,
checks graphop properties and measure representations, and reproduces a set
of convergent graph families at desk scale.
"""

from .measures import EmpiricalMeasure, MeasureSet, hausdorff, lp_distance
from .operators import (
    DenseOperator,
    FiniteSpace,
    GraphonGridOperator,
    MarkovKernelOperator,
    MarkovPair,
    Operator,
    ScaledOperator,
    SparseOperator,
    Vec,
    apply,
    bilinear_form,
    cut_norm,
    joint_distribution,
    make_space,
    norm_pq,
)
from .profiles import (
    Profile,
    QuotientSet,
    SamplingBudget,
    StrategyKind,
    enumerate_partition_profile_oracle,
    extended_profile,
    quotient_hausdorff,
    sample_partition_profile,
    sample_profile,
    sample_quotients,
)
from .distance import DmEstimate, dm_estimate
from .errors import InvariantViolation, SpaceMismatch, UsageError

__all__ = [
    "DenseOperator",
    "DmEstimate",
    "EmpiricalMeasure",
    "FiniteSpace",
    "GraphonGridOperator",
    "InvariantViolation",
    "MarkovKernelOperator",
    "MarkovPair",
    "MeasureSet",
    "Operator",
    "Profile",
    "QuotientSet",
    "SamplingBudget",
    "ScaledOperator",
    "SpaceMismatch",
    "SparseOperator",
    "StrategyKind",
    "UsageError",
    "Vec",
    "apply",
    "bilinear_form",
    "cut_norm",
    "dm_estimate",
    "enumerate_partition_profile_oracle",
    "extended_profile",
    "hausdorff",
    "joint_distribution",
    "lp_distance",
    "make_space",
    "norm_pq",
    "quotient_hausdorff",
    "sample_partition_profile",
    "sample_profile",
    "sample_quotients",
]
