"""Monte-Carlo estimation of between-metric correlations.

One oracle call draws a random group/label ratio vector, bootstraps a training
set with those ratios, fits a model, and audits it on the fixed test split:
accuracy plus all sixteen fairness metrics.  The estimator collects N accepted
samples per iteration (models under the accuracy threshold are rejected and
redrawn), computes a pairwise-deletion Pearson matrix per iteration, and
aggregates L iterations into a mean matrix with normal-approximation
confidence errors.

Child seeds are derived from (seed, iteration, sample, attempt), so any
parallel schedule of oracle calls reproduces the sequential result bit for
bit.
"""

from __future__ import annotations

import hashlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import norm

from .fairmetrics import N_METRICS, FairnessVector, confusion_split, fairness_vector
from .ingest import Dataset, GroupPartition, SplitConfig, partition_groups, split
from .models import ModelSpec, predict, train


class EstimationError(RuntimeError):
    """A correlation-estimation run could not complete."""


def _entropy(value) -> int:
    if isinstance(value, (int, np.integer)):
        return int(value)
    digest = hashlib.sha256(str(value).encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


def derive_rng(*keys) -> np.random.Generator:
    """Independent generator keyed by (ints or strings); order-independent
    across sibling streams, stable across runs and platforms."""
    return np.random.default_rng(np.random.SeedSequence([_entropy(k) for k in keys]))


def derive_seed(*keys) -> int:
    return int(derive_rng(*keys).integers(0, 2**31 - 1))


@dataclass(frozen=True)
class OracleConfig:
    """Sampling-oracle knobs: bootstrap size and the accept/reject threshold."""

    t_size: int | None = None  # None: |train| capped at 2000
    accept_threshold: float = 0.5
    max_attempts_per_sample: int = 20

    def __post_init__(self):
        if self.t_size is not None and self.t_size < 4:
            raise ValueError("t_size must be at least 4")
        if not 0.0 <= self.accept_threshold < 1.0:
            raise ValueError("accept_threshold must lie in [0, 1)")
        if self.max_attempts_per_sample < 1:
            raise ValueError("max_attempts_per_sample must be positive")

    def resolve_t_size(self, n_train: int) -> int:
        if self.t_size is not None:
            return self.t_size
        return min(n_train, 2000)


@dataclass(frozen=True)
class EstimatorConfig:
    n_samples: int = 1000
    n_iterations: int = 30
    confidence_level: float = 0.95
    min_valid_pairs: int = 30
    seed: int = 0

    def __post_init__(self):
        if self.n_samples < 2:
            raise ValueError("n_samples must be at least 2")
        if self.n_iterations < 2:
            raise ValueError("n_iterations must be at least 2 for a sample stdev")
        if not 0.0 < self.confidence_level < 1.0:
            raise ValueError("confidence_level must lie in (0, 1)")
        if self.min_valid_pairs < 1:
            raise ValueError("min_valid_pairs must be positive")


@dataclass
class FairnessSampleTable:
    """Accepted samples of one iteration: metric values, validity, accuracy."""

    iteration: int
    values: np.ndarray      # (rows, 16), NaN where invalid
    valid: np.ndarray       # (rows, 16) bool
    accuracies: np.ndarray  # (rows,)

    @property
    def rows(self) -> int:
        return len(self.accuracies)


@dataclass
class CorrelationEstimate:
    mean: np.ndarray           # (16, 16), NaN outside the defined mask
    conf_error: np.ndarray     # (16, 16), NaN outside the defined mask
    per_iteration: np.ndarray  # (L, 16, 16)
    support: np.ndarray        # (16, 16) int, min jointly-valid pairs per iteration
    defined: np.ndarray        # (16, 16) bool
    tables: list = field(default_factory=list)
    stats: dict = field(default_factory=dict)

    @property
    def defined_metrics(self) -> np.ndarray:
        return self.defined.diagonal().copy()


def sample_ratios(rng) -> np.ndarray:
    """Four Uniform(0,1) draws normalized to sum to 1."""
    while True:
        u = rng.random(4)
        total = u.sum()
        if total > 0.0:
            return u / total


def bootstrap_training_set(partition: GroupPartition, w, t_size: int, rng) -> np.ndarray:
    """round(w_i * t_size) uniform draws with replacement from each stratum.

    Quotas of empty strata are redistributed proportionally across the
    nonempty ones, so the total stays within rounding of t_size.
    """
    w = np.asarray(w, dtype=float)
    if w.shape != (4,) or abs(w.sum() - 1.0) > 1e-9 or (w < 0).any():
        raise ValueError("w must be a normalized length-4 ratio vector")
    sizes = np.array([len(g) for g in partition.strata])
    if (sizes == 0).all():
        raise ValueError("all strata are empty")
    eff = np.where(sizes > 0, w, 0.0)
    if eff.sum() == 0.0:  # all the mass sat on empty strata
        eff = (sizes > 0).astype(float)
    eff = eff / eff.sum()
    parts = []
    for stratum, share in zip(partition.strata, eff):
        quota = int(round(share * t_size))
        if quota > 0:
            parts.append(stratum[rng.integers(0, len(stratum), size=quota)])
    if not parts:
        return np.empty(0, dtype=int)
    return np.concatenate(parts)


def sampling_oracle(partition, dataset: Dataset, spec: ModelSpec, cfg: OracleConfig,
                    test_indices, rng) -> tuple[float, FairnessVector]:
    """One sampled model: ratio draw, bootstrap, fit, audit on the test split."""
    test_indices = np.asarray(test_indices, dtype=int)
    if len(test_indices) == 0:
        raise ValueError("test set is empty")
    w = sample_ratios(rng)
    n_train = sum(len(g) for g in partition.strata)
    boot = bootstrap_training_set(partition, w, cfg.resolve_t_size(n_train), rng)
    model_seed = int(rng.integers(0, 2**31 - 1))
    model = train(spec.with_seed(model_seed),
                  dataset.features[boot], dataset.label[boot])
    preds = predict(model, dataset.features[test_indices])
    labels = dataset.label[test_indices]
    acc = float(np.mean(preds == labels))
    fv = fairness_vector(confusion_split(preds, labels, dataset.sensitive[test_indices]))
    return acc, fv


def pearson(x, y, valid=None) -> float:
    """Pearson r over jointly valid pairs; NaN when undefined.

    Undefined means fewer than two valid pairs or a zero variance.  The result
    is exactly +/-1 for exactly (anti)proportional inputs and is clipped into
    [-1, 1] against rounding spill.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if valid is None:
        valid = np.isfinite(x) & np.isfinite(y)
    else:
        valid = np.asarray(valid, dtype=bool)
    if valid.sum() < 2:
        return float("nan")
    xv = x[valid]
    yv = y[valid]
    xc = xv - xv.mean()
    yc = yv - yv.mean()
    sx = xc @ xc
    sy = yc @ yc
    if sx <= 0.0 or sy <= 0.0:
        return float("nan")
    r = (xc @ yc) / np.sqrt(sx * sy)
    return float(min(1.0, max(-1.0, r)))


def _pearson_matrix(values, valid):
    """Pairwise-deletion correlation matrix and its support counts."""
    m = values.shape[1]
    corr = np.full((m, m), np.nan)
    support = np.zeros((m, m), dtype=int)
    for i in range(m):
        for j in range(i, m):
            pair_valid = valid[:, i] & valid[:, j]
            support[i, j] = support[j, i] = int(pair_valid.sum())
            r = pearson(values[:, i], values[:, j], pair_valid)
            corr[i, j] = corr[j, i] = r
    return corr, support


def z_quantile(confidence_level: float) -> float:
    """Standard-normal quantile at 1 - alpha/2 for alpha = 1 - confidence."""
    return float(norm.ppf(0.5 * (1.0 + confidence_level)))


def confidence_error(values, confidence_level: float) -> float:
    """z(1-alpha/2) * stdev(values) / sqrt(L) over the iteration axis."""
    values = np.asarray(values, dtype=float)
    L = len(values)
    if L < 2:
        raise ValueError("confidence error needs at least two iterations")
    if np.ptp(values) == 0.0:  # constant input: exactly zero spread
        return 0.0
    return float(z_quantile(confidence_level) * values.std(ddof=1) / np.sqrt(L))


def _collect_iteration(dataset, spec, ocfg, ecfg, test_fraction, ell, threads):
    """One estimation iteration; returns (table, stats) or None on shortfall."""
    N = ecfg.n_samples
    thr = ocfg.accept_threshold
    for round_idx in range(3):
        cfg = SplitConfig(test_fraction, derive_seed(ecfg.seed, "split", ell, round_idx))
        train_idx, test_idx = split(dataset, cfg)
        test_s = dataset.sensitive[test_idx]
        test_y = dataset.label[test_idx]
        if len(test_idx) == 0 or test_s.min() == test_s.max() or test_y.min() == test_y.max():
            raise EstimationError(
                f"degenerate test split at iteration {ell}: needs both groups "
                "and both labels")
        partition = partition_groups(dataset, train_idx)

        def run_slot(k):
            for attempt in range(ocfg.max_attempts_per_sample):
                rng = derive_rng(ecfg.seed, "oracle", ell, round_idx, k, attempt)
                acc, fv = sampling_oracle(partition, dataset, spec, ocfg, test_idx, rng)
                if acc >= thr:
                    return acc, fv, attempt + 1
            return None, None, ocfg.max_attempts_per_sample

        if threads > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                results = list(pool.map(run_slot, range(N)))
        else:
            results = [run_slot(k) for k in range(N)]

        draws = sum(r[2] for r in results)
        accepted = [(acc, fv) for acc, fv, _ in results if acc is not None]
        stats = {
            "draws": draws,
            "rejected": draws - len(accepted),
            "shortfall": N - len(accepted),
        }
        if 2 * len(accepted) >= N:
            table = FairnessSampleTable(
                iteration=ell,
                values=np.vstack([fv.values for _, fv in accepted]),
                valid=np.vstack([fv.valid for _, fv in accepted]),
                accuracies=np.array([acc for acc, _ in accepted]),
            )
            return table, stats
    raise EstimationError(
        f"iteration {ell} aborted 3 times: accepted {len(accepted)}/{N} samples "
        f"(accuracy threshold {thr}); the model family may be too weak for "
        "this dataset")


def corr_estimate(dataset: Dataset, spec: ModelSpec, ocfg: OracleConfig,
                  ecfg: EstimatorConfig, test_fraction: float = 0.3,
                  threads: int = 1) -> CorrelationEstimate:
    """L iterations of N accepted oracle samples, aggregated per the two-level
    scheme: elementwise mean of per-iteration Pearson matrices plus confidence
    errors.  Bit-reproducible for a fixed ``ecfg.seed`` at any thread count."""
    m = N_METRICS
    L = ecfg.n_iterations
    per_iteration = np.full((L, m, m), np.nan)
    supports = np.zeros((L, m, m), dtype=int)
    tables = []
    run_stats = {"draws": 0, "rejected": 0, "shortfalls": [], "rows": []}

    for ell in range(L):
        table, stats = _collect_iteration(
            dataset, spec, ocfg, ecfg, test_fraction, ell, threads)
        assert (table.accuracies >= ocfg.accept_threshold).all()
        corr, support = _pearson_matrix(table.values, table.valid)
        per_iteration[ell] = corr
        supports[ell] = support
        tables.append(table)
        run_stats["draws"] += stats["draws"]
        run_stats["rejected"] += stats["rejected"]
        run_stats["shortfalls"].append(stats["shortfall"])
        run_stats["rows"].append(table.rows)

    support = supports.min(axis=0)
    defined = np.isfinite(per_iteration).all(axis=0) & (support >= ecfg.min_valid_pairs)
    mean = np.where(defined, per_iteration.mean(axis=0), np.nan)
    z = z_quantile(ecfg.confidence_level)
    conf = np.where(defined,
                    z * per_iteration.std(axis=0, ddof=1) / np.sqrt(L),
                    np.nan)
    return CorrelationEstimate(
        mean=mean,
        conf_error=conf,
        per_iteration=per_iteration,
        support=support,
        defined=defined,
        tables=tables,
        stats=run_stats,
    )
