"""salientrank: relative-salience ground truth, metrics, and a toy network.

The package covers the full desk-scale pipeline for multi-object
salience with observer agreement: nested ground-truth stacks, the
rank-by-detection SOR metric, threshold-sweep detection metrics,
subitizing average precision, a gradient-checked refinement network,
and a CLI harness for synthetic datasets and evaluation reports.
"""

__version__ = "0.1.0"

from .core import (
    AgreementMap,
    BinaryMap,
    InstanceMap,
    NestedStack,
    SaliencyMap,
    build_nested_stack,
    collapse_stack,
    downsample_targets,
    normalize_saliency,
    threshold_agreement,
)
from .ranking import (
    DatasetSor,
    InstanceScore,
    RankVector,
    SorResult,
    dataset_sor,
    gt_rank_from_agreement,
    instance_rank_scores,
    rank_order,
    sor_score,
    spearman,
)
from .detection import (
    BestReport,
    CurvePoint,
    SliceReport,
    auc,
    confusion_sweep,
    dataset_detection_report,
    evaluate_against_stack,
    f_measures,
    mae,
)
from .subitizing import (
    ApReport,
    CountScheme,
    PASCALS_SCHEME,
    SOS_SCHEME,
    SubitizingPrediction,
    average_precision,
    class_distribution,
    count_to_class,
    subitizing_report,
)

__all__ = [
    "__version__",
    "AgreementMap",
    "BinaryMap",
    "InstanceMap",
    "NestedStack",
    "SaliencyMap",
    "build_nested_stack",
    "collapse_stack",
    "downsample_targets",
    "normalize_saliency",
    "threshold_agreement",
    "DatasetSor",
    "InstanceScore",
    "RankVector",
    "SorResult",
    "dataset_sor",
    "gt_rank_from_agreement",
    "instance_rank_scores",
    "rank_order",
    "sor_score",
    "spearman",
    "BestReport",
    "CurvePoint",
    "SliceReport",
    "auc",
    "confusion_sweep",
    "dataset_detection_report",
    "evaluate_against_stack",
    "f_measures",
    "mae",
    "ApReport",
    "CountScheme",
    "PASCALS_SCHEME",
    "SOS_SCHEME",
    "SubitizingPrediction",
    "average_precision",
    "class_distribution",
    "count_to_class",
    "subitizing_report",
]
