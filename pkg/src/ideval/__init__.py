"""ideval: impact and quality metrics for cluster id assignment schemes.

Two id-assignment runs over the same items (a baseline and an experiment)
are compared by expanding each cluster id into a cluster containing its
historical members (or a synthetic stand-in) plus the items assigned to
it. The expanded clusterings are diffed pointwise: impact metrics say how
much changed, and quality metrics, given a reference partition or human
judgements, say whether the change moved toward or away from the truth.
"""

from ._backend import BACKEND_NAME
from .errors import IdEvalError, InputError, JudgementConflict, NothingToDo
from .metrics import (
    MetricsReport,
    aggregate_impact,
    aggregate_quality,
    compute_iq,
    evaluate,
    expected_jaccard_distance,
    pointwise_impact,
    pointwise_quality,
)
from .model import (
    ElementRef,
    LabeledClustering,
    MembershipIndex,
    WeightMap,
    build_membership_index,
    validate_labeled_clustering,
)
from .transform import (
    EvalInputs,
    HistoricalEpoch,
    TransformConfig,
    align_current_items,
    attach_ideal,
    build_eval_inputs,
    collapse_historical_clusters,
    hist_members_or_id,
    merge_historical_epochs,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND_NAME",
    "ElementRef",
    "EvalInputs",
    "HistoricalEpoch",
    "IdEvalError",
    "InputError",
    "JudgementConflict",
    "LabeledClustering",
    "MembershipIndex",
    "MetricsReport",
    "NothingToDo",
    "TransformConfig",
    "WeightMap",
    "aggregate_impact",
    "aggregate_quality",
    "align_current_items",
    "attach_ideal",
    "build_eval_inputs",
    "build_membership_index",
    "collapse_historical_clusters",
    "compute_iq",
    "evaluate",
    "expected_jaccard_distance",
    "hist_members_or_id",
    "merge_historical_epochs",
    "pointwise_impact",
    "pointwise_quality",
    "validate_labeled_clustering",
    "__version__",
]
