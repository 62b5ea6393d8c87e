"""Split confusion matrices and the sixteen group-fairness metrics built on them.

Every metric compares the unprivileged group (s=0) against the privileged
group (s=1): difference metrics as group-0 rate minus group-1 rate, ratio
metrics as group-0 rate over group-1 rate.  A metric whose formula hits a zero
denominator is flagged invalid instead of raising; downstream consumers work
with the validity mask.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

#: Stable (label, name) order.  The f1..f16 labels and this ordering are part
#: of the output contract for every CSV/JSON artifact.
METRICS = (
    ("f1", "equalized_odds"),
    ("f2", "error_difference"),
    ("f3", "error_ratio"),
    ("f4", "discovery_difference"),
    ("f5", "discovery_ratio"),
    ("f6", "predictive_equality"),
    ("f7", "fpr_ratio"),
    ("f8", "for_difference"),
    ("f9", "for_ratio"),
    ("f10", "disparate_impact"),
    ("f11", "statistical_parity"),
    ("f12", "equal_opportunity"),
    ("f13", "fnr_difference"),
    ("f14", "fnr_ratio"),
    ("f15", "average_odds_difference"),
    ("f16", "predictive_parity"),
)

METRIC_LABELS = tuple(label for label, _ in METRICS)
METRIC_NAMES = tuple(name for _, name in METRICS)
N_METRICS = len(METRICS)

#: 0-based indices of quotient-style metrics, whose fair value is 1 (all
#: others are differences whose fair value is 0; f1 is a mean of absolute
#: differences and also targets 0).
RATIO_METRICS = frozenset({2, 4, 6, 8, 9, 13})


def metric_index(key) -> int:
    """Resolve an int, an 'f7'-style label, or a metric name to its index."""
    if isinstance(key, (int, np.integer)):
        if not 0 <= key < N_METRICS:
            raise ValueError(f"metric index out of range: {key}")
        return int(key)
    key = str(key)
    if key in METRIC_LABELS:
        return METRIC_LABELS.index(key)
    if key in METRIC_NAMES:
        return METRIC_NAMES.index(key)
    raise ValueError(f"unknown metric: {key!r}")


@dataclass(frozen=True)
class ConfusionSplit:
    """Per-group confusion counts: group 0 is unprivileged, group 1 privileged."""

    tp0: int
    fp0: int
    fn0: int
    tn0: int
    tp1: int
    fp1: int
    fn1: int
    tn1: int

    def __post_init__(self):
        for name in ("tp0", "fp0", "fn0", "tn0", "tp1", "fp1", "fn1", "tn1"):
            if getattr(self, name) < 0:
                raise ValueError(f"negative count {name}")

    @property
    def n0(self) -> int:
        return self.tp0 + self.fp0 + self.fn0 + self.tn0

    @property
    def n1(self) -> int:
        return self.tp1 + self.fp1 + self.fn1 + self.tn1

    def swapped(self) -> "ConfusionSplit":
        """The same counts with the group labels exchanged."""
        return ConfusionSplit(
            tp0=self.tp1, fp0=self.fp1, fn0=self.fn1, tn0=self.tn1,
            tp1=self.tp0, fp1=self.fp0, fn1=self.fn0, tn1=self.tn0,
        )


@dataclass
class FairnessVector:
    """The 16 metric values for one model; NaN wherever ``valid`` is False."""

    values: np.ndarray
    valid: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        self.valid = np.asarray(self.valid, dtype=bool)
        if self.values.shape != (N_METRICS,) or self.valid.shape != (N_METRICS,):
            raise ValueError("fairness vector must have 16 entries")


def confusion_split(predictions, labels, sensitive) -> ConfusionSplit:
    """Tally per-group TP/FP/FN/TN from three equal-length binary vectors."""
    p = np.asarray(predictions).astype(int)
    y = np.asarray(labels).astype(int)
    s = np.asarray(sensitive).astype(int)
    if not (len(p) == len(y) == len(s)):
        raise ValueError("predictions, labels and sensitive must have equal length")
    if len(p) == 0:
        raise ValueError("empty evaluation set")
    for v, name in ((p, "predictions"), (y, "labels"), (s, "sensitive")):
        if not np.isin(v, (0, 1)).all():
            raise ValueError(f"{name} must be binary 0/1")

    def counts(group):
        g = s == group
        tp = int(np.sum(g & (y == 1) & (p == 1)))
        fp = int(np.sum(g & (y == 0) & (p == 1)))
        fn = int(np.sum(g & (y == 1) & (p == 0)))
        tn = int(np.sum(g & (y == 0) & (p == 0)))
        return tp, fp, fn, tn

    tp0, fp0, fn0, tn0 = counts(0)
    tp1, fp1, fn1, tn1 = counts(1)
    return ConfusionSplit(tp0, fp0, fn0, tn0, tp1, fp1, fn1, tn1)


def _rate(num, den):
    """num/den with a validity flag; a zero denominator invalidates the rate."""
    if den > 0:
        return num / den, True
    return np.nan, False


def fairness_vector(cs: ConfusionSplit) -> FairnessVector:
    """Evaluate all 16 metrics from one split confusion matrix.

    Base rates are computed once and the composite metrics (f1, f15) reuse the
    exact same difference values, so their algebraic identities with f6/f12
    hold at floating-point precision.
    """
    values = np.full(N_METRICS, np.nan)
    valid = np.zeros(N_METRICS, dtype=bool)
    out = FairnessVector(values, valid)
    if cs.n0 == 0 or cs.n1 == 0:
        return out

    fpr0, fpr0_ok = _rate(cs.fp0, cs.fp0 + cs.tn0)
    fpr1, fpr1_ok = _rate(cs.fp1, cs.fp1 + cs.tn1)
    tpr0, tpr0_ok = _rate(cs.tp0, cs.tp0 + cs.fn0)
    tpr1, tpr1_ok = _rate(cs.tp1, cs.tp1 + cs.fn1)
    fnr0, fnr0_ok = _rate(cs.fn0, cs.fn0 + cs.tp0)
    fnr1, fnr1_ok = _rate(cs.fn1, cs.fn1 + cs.tp1)
    for0, for0_ok = _rate(cs.fn0, cs.tn0 + cs.fn0)
    for1, for1_ok = _rate(cs.fn1, cs.tn1 + cs.fn1)
    fdr0, fdr0_ok = _rate(cs.fp0, cs.tp0 + cs.fp0)
    fdr1, fdr1_ok = _rate(cs.fp1, cs.tp1 + cs.fp1)
    ppv0, ppv0_ok = _rate(cs.tp0, cs.tp0 + cs.fp0)
    ppv1, ppv1_ok = _rate(cs.tp1, cs.tp1 + cs.fp1)
    pos0 = (cs.tp0 + cs.fp0) / cs.n0
    pos1 = (cs.tp1 + cs.fp1) / cs.n1
    n_all = cs.n0 + cs.n1
    err0 = (cs.fp0 + cs.fn0) / n_all
    err1 = (cs.fp1 + cs.fn1) / n_all

    def put(idx, value, ok):
        if ok:
            values[idx] = value
            valid[idx] = True

    def put_ratio(idx, num, num_ok, den, den_ok):
        # a/b of two rates: needs both rates defined and a nonzero divisor
        if num_ok and den_ok and den > 0:
            values[idx] = num / den
            valid[idx] = True

    d_fpr_ok = fpr0_ok and fpr1_ok
    d_fpr = fpr0 - fpr1 if d_fpr_ok else np.nan
    d_tpr_ok = tpr0_ok and tpr1_ok
    d_tpr = tpr0 - tpr1 if d_tpr_ok else np.nan

    # f1 equalized odds: mean absolute gap of FPR and TPR
    put(0, 0.5 * (abs(d_fpr) + abs(d_tpr)), d_fpr_ok and d_tpr_ok)
    # f2 error difference, both groups normalized by the pooled size
    put(1, err0 - err1, True)
    # f3 error ratio: group-1 errors in the denominator, symmetric with the
    # numerator; the pooled-size factors cancel and are elided.
    put_ratio(2, cs.fp0 + cs.fn0, True, cs.fp1 + cs.fn1, True)
    # f4/f5 discovery (false discovery rate) difference and ratio
    put(3, fdr0 - fdr1, fdr0_ok and fdr1_ok)
    put_ratio(4, fdr0, fdr0_ok, fdr1, fdr1_ok)
    # f6/f7 predictive equality (FPR difference) and FPR ratio
    put(5, d_fpr, d_fpr_ok)
    put_ratio(6, fpr0, fpr0_ok, fpr1, fpr1_ok)
    # f8/f9 false omission rate difference and ratio
    put(7, for0 - for1, for0_ok and for1_ok)
    put_ratio(8, for0, for0_ok, for1, for1_ok)
    # f10/f11 disparate impact and statistical parity (n0, n1 > 0 here)
    put_ratio(9, pos0, True, pos1, True)
    put(10, pos0 - pos1, True)
    # f12 equal opportunity (TPR difference)
    put(11, d_tpr, d_tpr_ok)
    # f13/f14 FNR difference and ratio
    put(12, fnr0 - fnr1, fnr0_ok and fnr1_ok)
    put_ratio(13, fnr0, fnr0_ok, fnr1, fnr1_ok)
    # f15 average odds difference, reusing the same FPR/TPR gaps as f6/f12
    put(14, 0.5 * (d_fpr + d_tpr), d_fpr_ok and d_tpr_ok)
    # f16 predictive parity (precision difference)
    put(15, ppv0 - ppv1, ppv0_ok and ppv1_ok)

    return out


def unfairness_gap(values) -> np.ndarray:
    """Magnitude of unfairness per metric: |v| for differences, |v-1| for ratios.

    NaN entries pass through, so invalid metrics stay invalid in gap space.
    """
    values = np.asarray(values, dtype=float)
    gaps = np.abs(values).astype(float)
    for idx in RATIO_METRICS:
        gaps[..., idx] = np.abs(values[..., idx] - 1.0)
    return gaps
