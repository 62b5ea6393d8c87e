"""Correlation-aware selection of representative group-fairness metrics.

The pipeline: load a tabular dataset with a binary sensitive attribute and
label, sample many classifiers by bootstrapping the training data with
randomized group/label ratios, estimate pairwise Pearson correlations between
sixteen fairness metrics across those samples, cluster the metrics around
pivot representatives at a correlation threshold, and check that mitigating a
representative propagates to the metrics it represents.
"""

__version__ = "0.1.0"

from .fairmetrics import (
    METRIC_LABELS,
    METRIC_NAMES,
    METRICS,
    N_METRICS,
    RATIO_METRICS,
    ConfusionSplit,
    FairnessVector,
    confusion_split,
    fairness_vector,
    metric_index,
    unfairness_gap,
)

__all__ = [
    "METRICS",
    "METRIC_LABELS",
    "METRIC_NAMES",
    "N_METRICS",
    "RATIO_METRICS",
    "ConfusionSplit",
    "FairnessVector",
    "confusion_split",
    "fairness_vector",
    "metric_index",
    "unfairness_gap",
    "__version__",
]
