import math

import numpy as np
import pytest

from faircorr.estimator import (
    CorrelationEstimate,
    EstimationError,
    EstimatorConfig,
    FairnessSampleTable,
    OracleConfig,
    bootstrap_training_set,
    confidence_error,
    corr_estimate,
    derive_rng,
    derive_seed,
    pearson,
    sample_ratios,
    sampling_oracle,
    z_quantile,
)
from faircorr.fairmetrics import METRIC_LABELS
from faircorr.ingest import GroupPartition, SplitConfig, partition_groups, split
from faircorr.models import ModelSpec, accuracy, train

F = {label: i for i, label in enumerate(METRIC_LABELS)}


def ref_pearson(x, y):
    """Two-pass reference implementation in pure Python floats."""
    n = len(x)
    mx = sum(x) / n
    my = sum(y) / n
    num = sum((a - mx) * (b - my) for a, b in zip(x, y))
    sx = sum((a - mx) ** 2 for a in x)
    sy = sum((b - my) ** 2 for b in y)
    if sx <= 0 or sy <= 0:
        return float("nan")
    return num / math.sqrt(sx * sy)


class TestSampleRatios:
    def test_normalized(self, rng):
        for _ in range(100):
            w = sample_ratios(rng)
            assert abs(w.sum() - 1.0) <= 1e-12
            assert (w > 0).all()

    def test_deterministic(self):
        a = sample_ratios(np.random.default_rng(5))
        b = sample_ratios(np.random.default_rng(5))
        assert np.array_equal(a, b)

    def test_symmetric_mean(self):
        rng = np.random.default_rng(42)
        draws = np.array([sample_ratios(rng) for _ in range(100_000)])
        assert np.abs(draws.mean(axis=0) - 0.25).max() < 0.01


class TestBootstrap:
    def make_partition(self, sizes):
        start = 0
        strata = []
        for size in sizes:
            strata.append(np.arange(start, start + size))
            start += size
        return GroupPartition(*strata)

    def test_all_mass_on_one_stratum(self, rng):
        part = self.make_partition([10, 10, 10, 10])
        idx = bootstrap_training_set(part, np.array([1.0, 0, 0, 0]), 100, rng)
        assert len(idx) == 100
        assert (idx < 10).all()

    def test_singleton_strata_with_replacement(self, rng):
        part = self.make_partition([1, 1, 1, 1])
        idx = bootstrap_training_set(part, np.full(4, 0.25), 100, rng)
        assert len(idx) == 100
        assert np.array_equal(np.unique(idx), np.arange(4))
        counts = np.bincount(idx)
        assert (counts == 25).all()

    def test_empty_stratum_quota_redistributed(self, rng):
        part = self.make_partition([40, 0, 30, 30])
        w = np.array([0.25, 0.25, 0.25, 0.25])
        idx = bootstrap_training_set(part, w, 120, rng)
        assert abs(len(idx) - 120) <= 3
        assert not np.isin(idx, np.arange(40, 40)).any()
        # redistribution is proportional: each nonempty stratum gets ~1/3
        thirds = [np.sum(idx < 40), np.sum((idx >= 40) & (idx < 70)), np.sum(idx >= 70)]
        assert all(t == 40 for t in thirds)

    def test_total_near_t_size(self, rng):
        part = self.make_partition([50, 60, 70, 80])
        for _ in range(50):
            w = sample_ratios(rng)
            idx = bootstrap_training_set(part, w, 200, rng)
            assert abs(len(idx) - 200) <= 3

    def test_all_empty_errors(self, rng):
        part = self.make_partition([0, 0, 0, 0])
        with pytest.raises(ValueError):
            bootstrap_training_set(part, np.full(4, 0.25), 50, rng)

    def test_unnormalized_rejected(self, rng):
        part = self.make_partition([5, 5, 5, 5])
        with pytest.raises(ValueError):
            bootstrap_training_set(part, np.array([0.5, 0.5, 0.5, 0.5]), 50, rng)


class TestSamplingOracle:
    def test_consistency_with_replayed_stream(self, small_dataset):
        ds = small_dataset
        train_idx, test_idx = split(ds, SplitConfig(0.3, seed=3))
        part = partition_groups(ds, train_idx)
        cfg = OracleConfig()
        spec = ModelSpec("logit")

        acc, fv = sampling_oracle(part, ds, spec, cfg, test_idx, np.random.default_rng(77))

        # replay the documented draw sequence: ratios, bootstrap, model seed
        rng = np.random.default_rng(77)
        w = sample_ratios(rng)
        boot = bootstrap_training_set(part, w, cfg.resolve_t_size(len(train_idx)), rng)
        model = train(spec.with_seed(int(rng.integers(0, 2**31 - 1))),
                      ds.features[boot], ds.label[boot])
        assert accuracy(model, ds.features[test_idx], ds.label[test_idx]) == acc

    def test_deterministic_for_same_child_seed(self, small_dataset):
        ds = small_dataset
        train_idx, test_idx = split(ds, SplitConfig(0.3, seed=3))
        part = partition_groups(ds, train_idx)
        args = (part, ds, ModelSpec("logit"), OracleConfig(), test_idx)
        acc1, fv1 = sampling_oracle(*args, np.random.default_rng(9))
        acc2, fv2 = sampling_oracle(*args, np.random.default_rng(9))
        assert acc1 == acc2
        assert np.array_equal(fv1.values, fv2.values, equal_nan=True)
        assert np.array_equal(fv1.valid, fv2.valid)


class TestPearson:
    def test_perfect_positive_and_negative(self, rng):
        x = rng.normal(size=50)
        assert pearson(x, x) == 1.0
        assert pearson(x, -x) == -1.0

    def test_hand_computed_value(self):
        # frozen from the two-pass reference implementation
        r = pearson(np.array([1.0, 2.0, 3.0]), np.array([2.0, 4.0, 7.0]))
        assert r == pytest.approx(0.9933992677987828, abs=1e-15)

    def test_matches_reference(self, rng):
        for _ in range(200):
            x = rng.normal(size=30)
            y = rng.normal(size=30)
            assert pearson(x, y) == pytest.approx(ref_pearson(list(x), list(y)), abs=1e-12)

    def test_undefined_cases(self):
        assert math.isnan(pearson([1.0, 1.0, 1.0], [1.0, 2.0, 3.0]))
        assert math.isnan(pearson([1.0], [2.0]))
        x = np.array([1.0, 2.0, np.nan, 4.0])
        y = np.array([2.0, np.nan, 3.0, 8.0])
        # pairwise deletion leaves rows 0 and 3
        assert pearson(x, y) == 1.0

    def test_explicit_mask(self):
        x = np.array([1.0, 2.0, 3.0, 100.0])
        y = np.array([2.0, 4.0, 6.0, -5.0])
        mask = np.array([True, True, True, False])
        assert pearson(x, y, mask) == 1.0


class TestConfidenceError:
    def test_z_quantile(self):
        # frozen from an erf-bisection quantile computation
        assert z_quantile(0.95) == pytest.approx(1.9599639845400536, abs=1e-4)
        assert z_quantile(0.99) == pytest.approx(2.5758293035489004, abs=1e-4)

    def test_equal_values_zero_error(self):
        assert confidence_error([0.4, 0.4, 0.4], 0.95) == 0.0

    def test_hand_computed(self):
        e = confidence_error([0.8, 1.0], 0.95)
        assert e == pytest.approx(0.19599639845400532, abs=1e-10)

    def test_needs_two_values(self):
        with pytest.raises(ValueError):
            confidence_error([0.5], 0.95)


@pytest.fixture(scope="module")
def small_estimate(small_dataset):
    return corr_estimate(
        small_dataset,
        ModelSpec("logit"),
        OracleConfig(),
        EstimatorConfig(n_samples=40, n_iterations=3, min_valid_pairs=10, seed=5),
    )


class TestCorrEstimate:
    def test_diagonal_is_one_where_defined(self, small_estimate):
        est = small_estimate
        diag = est.mean.diagonal()
        for i in range(16):
            if est.defined[i, i]:
                assert diag[i] == pytest.approx(1.0, abs=1e-12)

    def test_exact_negation_channel(self, small_estimate):
        est = small_estimate
        i, j = F["f12"], F["f13"]
        assert est.defined[i, j]
        assert est.mean[i, j] == pytest.approx(-1.0, abs=1e-9)
        assert est.conf_error[i, j] <= 1e-9

    def test_symmetry_and_range(self, small_estimate):
        est = small_estimate
        finite = np.isfinite(est.mean)
        assert np.array_equal(finite, finite.T)
        assert np.array_equal(est.mean[finite], est.mean.T[finite.T])
        assert (np.abs(est.mean[finite]) <= 1.0 + 1e-12).all()
        assert (est.conf_error[np.isfinite(est.conf_error)] >= 0.0).all()
        assert np.array_equal(est.support, est.support.T)

    def test_acceptance_filter_holds(self, small_estimate):
        for table in small_estimate.tables:
            assert (table.accuracies >= 0.5).all()
            assert table.rows <= 40

    def test_reproducible_and_thread_invariant(self, small_dataset):
        kwargs = dict(
            dataset=small_dataset,
            spec=ModelSpec("logit"),
            ocfg=OracleConfig(),
            ecfg=EstimatorConfig(n_samples=20, n_iterations=2, min_valid_pairs=5, seed=8),
        )
        a = corr_estimate(**kwargs)
        b = corr_estimate(**kwargs)
        c = corr_estimate(**kwargs, threads=3)
        for other in (b, c):
            assert np.array_equal(a.mean, other.mean, equal_nan=True)
            assert np.array_equal(a.conf_error, other.conf_error, equal_nan=True)
            assert np.array_equal(a.per_iteration, other.per_iteration, equal_nan=True)
            assert np.array_equal(a.support, other.support)

    def test_prefix_property_of_iterations(self, small_dataset):
        """A longer run's first iterations equal a shorter run's, so L-scaling
        comparisons can share one seed family."""
        base = dict(dataset=small_dataset, spec=ModelSpec("logit"), ocfg=OracleConfig())
        short = corr_estimate(
            **base, ecfg=EstimatorConfig(n_samples=15, n_iterations=2,
                                         min_valid_pairs=5, seed=21))
        longer = corr_estimate(
            **base, ecfg=EstimatorConfig(n_samples=15, n_iterations=3,
                                         min_valid_pairs=5, seed=21))
        assert np.array_equal(short.per_iteration, longer.per_iteration[:2],
                              equal_nan=True)

    def test_impossible_threshold_fails_with_diagnostics(self, small_dataset):
        with pytest.raises(EstimationError, match="aborted"):
            corr_estimate(
                small_dataset,
                ModelSpec("logit"),
                OracleConfig(accept_threshold=0.999, max_attempts_per_sample=2),
                EstimatorConfig(n_samples=10, n_iterations=2, seed=1),
            )

    def test_stats_recorded(self, small_estimate):
        stats = small_estimate.stats
        assert stats["draws"] >= sum(stats["rows"])
        assert stats["rejected"] == stats["draws"] - sum(stats["rows"]) - sum(
            stats["shortfalls"])
        assert len(stats["rows"]) == 3


class TestConfigs:
    def test_oracle_config_validation(self):
        with pytest.raises(ValueError):
            OracleConfig(t_size=3)
        with pytest.raises(ValueError):
            OracleConfig(accept_threshold=1.0)
        assert OracleConfig().resolve_t_size(5000) == 2000
        assert OracleConfig().resolve_t_size(700) == 700
        assert OracleConfig(t_size=100).resolve_t_size(700) == 100

    def test_estimator_config_validation(self):
        with pytest.raises(ValueError):
            EstimatorConfig(n_iterations=1)
        with pytest.raises(ValueError):
            EstimatorConfig(n_samples=1)
        with pytest.raises(ValueError):
            EstimatorConfig(confidence_level=1.0)

    def test_derive_seed_is_stable_and_keyed(self):
        assert derive_seed(1, "split", 0, 0) == derive_seed(1, "split", 0, 0)
        assert derive_seed(1, "split", 0, 0) != derive_seed(1, "split", 0, 1)
        assert derive_seed(1, "oracle", 0, 0) != derive_seed(1, "split", 0, 0)
        a = derive_rng(3, "x").random(4)
        b = derive_rng(3, "x").random(4)
        assert np.array_equal(a, b)
