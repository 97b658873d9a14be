import math

import numpy as np
import pytest
from scipy import integrate, stats

from ncda.data import SeedSpec, derive_stream
from ncda.simulation import (
    CALIBRATED_NCC,
    ExperimentConfig,
    GaussianComponent,
    MixtureSpec,
    bayes_error_exp1,
    experiment_mixtures,
    make_test_set,
    make_training_set,
    run_experiment,
    run_trial,
    sample_gaussian,
    sample_mixture,
)


def stream(trial=0, purpose="train", p=3, n=10):
    return derive_stream(SeedSpec(99, "EXP1", p, n, trial, purpose))


class TestSampleGaussian:
    def test_zero_count(self):
        comp = GaussianComponent(np.zeros(3), np.eye(3))
        out = sample_gaussian(comp, 0, stream())
        assert out.shape == (0, 3)

    def test_mean_within_clt_bound(self):
        mean = np.array([1.0, -2.0, 3.0])
        comp = GaussianComponent(mean, np.eye(3))
        draws = sample_gaussian(comp, 100_000, stream())
        # 4-sigma bound on each coordinate of the sample mean.
        assert np.abs(draws.mean(axis=0) - mean).max() <= 4 / math.sqrt(100_000)

    def test_covariance_transform(self):
        cov = np.array([[2.0, 0.6], [0.6, 1.0]])
        comp = GaussianComponent(np.zeros(2), cov)
        draws = sample_gaussian(comp, 200_000, stream(trial=1))
        sample_cov = np.cov(draws, rowvar=False)
        assert np.abs(sample_cov - cov).max() < 0.05

    def test_deterministic(self):
        comp = GaussianComponent(np.zeros(2), np.eye(2))
        a = sample_gaussian(comp, 50, stream(trial=2))
        b = sample_gaussian(comp, 50, stream(trial=2))
        assert np.array_equal(a, b)

    def test_non_spd_covariance(self):
        comp = GaussianComponent(np.zeros(2), np.array([[1.0, 2.0], [2.0, 1.0]]))
        with pytest.raises(np.linalg.LinAlgError):
            sample_gaussian(comp, 5, stream())


class TestSampleMixture:
    def test_single_component_matches_gaussian_exactly(self):
        comp = GaussianComponent(np.array([3.0, 3.0]), np.eye(2))
        spec = MixtureSpec((comp,), (1.0,))
        a = sample_mixture(spec, 40, stream(trial=3))
        b = sample_gaussian(comp, 40, stream(trial=3))
        assert np.array_equal(a, b)

    def test_equal_weights_frequencies(self):
        far = GaussianComponent(np.array([100.0]), np.eye(1))
        near = GaussianComponent(np.array([0.0]), np.eye(1))
        spec = MixtureSpec((near, far), (0.5, 0.5))
        draws = sample_mixture(spec, 100_000, stream(trial=4))
        frac_far = float(np.mean(draws[:, 0] > 50.0))
        assert abs(frac_far - 0.5) < 0.01

    def test_zero_weight_component_never_sampled(self):
        far = GaussianComponent(np.array([100.0]), np.eye(1))
        near = GaussianComponent(np.array([0.0]), np.eye(1))
        spec = MixtureSpec((near, far), (1.0, 0.0))
        draws = sample_mixture(spec, 5000, stream(trial=5))
        assert (draws[:, 0] < 50.0).all()

    def test_weight_validation(self):
        comp = GaussianComponent(np.zeros(1), np.eye(1))
        with pytest.raises(ValueError):
            MixtureSpec((comp,), (0.5,))
        with pytest.raises(ValueError):
            MixtureSpec((comp, comp), (1.5, -0.5))

    def test_degenerate_two_component_mixture_reduces_exactly(self):
        # A two-component mixture with weights (1, 0) must consume the same
        # stream draws as the corresponding single Gaussian.
        f1_mix, f2_mix = experiment_mixtures("EXP3", 4, 1.0)
        f1_exp1, f2_exp1 = experiment_mixtures("EXP1", 4, 1.0)
        degenerate1 = MixtureSpec(f1_mix.components, (1.0, 0.0))
        degenerate2 = MixtureSpec(f2_mix.components, (1.0, 0.0))
        a1 = sample_mixture(degenerate1, 30, stream(trial=6))
        b1 = sample_mixture(f1_exp1, 30, stream(trial=6))
        assert np.array_equal(a1, b1)
        a2 = sample_mixture(degenerate2, 30, stream(trial=7))
        b2 = sample_mixture(f2_exp1, 30, stream(trial=7))
        assert np.array_equal(a2, b2)


class TestExperimentMixtures:
    def test_exp1_means(self):
        f1, f2 = experiment_mixtures("EXP1", 3, 1.0)
        assert np.array_equal(f1.components[0].mean, np.zeros(3))
        assert np.array_equal(f2.components[0].mean, np.ones(3))

    def test_exp2_structure(self):
        f1, f2 = experiment_mixtures("EXP2", 2, 1.0)
        assert len(f1.components) == 2
        assert f1.weights == (0.5, 0.5)
        assert np.array_equal(f1.components[1].mean, 2 * np.ones(2))
        assert len(f2.components) == 1
        assert np.array_equal(f2.components[0].mean, np.ones(2))

    def test_exp3_structure(self):
        f1, f2 = experiment_mixtures("EXP3", 2, 1.0)
        assert np.array_equal(f2.components[0].mean, np.ones(2))
        assert np.array_equal(f2.components[1].mean, 3 * np.ones(2))

    def test_separation_scales(self):
        f1, f2 = experiment_mixtures("EXP1", 2, 2.5)
        assert np.array_equal(f2.components[0].mean, 2.5 * np.ones(2))

    def test_unknown_experiment(self):
        with pytest.raises(ValueError):
            experiment_mixtures("EXP9", 2, 1.0)


class TestRunTrial:
    def test_deterministic(self):
        cfg = ExperimentConfig(experiment_id="EXP1", trials=1)
        a = run_trial(cfg, 2, 20, 0)
        b = run_trial(cfg, 2, 20, 0)
        assert a == b

    def test_lda_near_bayes_at_large_n(self):
        # Bayes error for p=2, c=1 is Phi(-sqrt(2)/2) = 0.2398.
        cfg = ExperimentConfig(experiment_id="EXP1", classifiers=("LDA",))
        out = run_trial(cfg, 2, 200, 0)
        assert 0.20 <= out["LDA"] <= 0.29

    def test_exp2_lda_near_half(self):
        cfg = ExperimentConfig(experiment_id="EXP2", classifiers=("LDA",))
        errs = [run_trial(cfg, 2, 40, t)["LDA"] for t in range(20)]
        assert 0.44 <= float(np.mean(errs)) <= 0.56

    def test_training_sets_differ_by_trial(self):
        cfg = ExperimentConfig(experiment_id="EXP1")
        a = make_training_set(cfg, 2, 10, 0)
        b = make_training_set(cfg, 2, 10, 1)
        assert not np.array_equal(a.features, b.features)

    def test_test_set_fixed_per_dimension(self):
        cfg = ExperimentConfig(experiment_id="EXP1")
        x1, y1 = make_test_set(cfg, 4)
        x2, y2 = make_test_set(cfg, 4)
        assert np.array_equal(x1, x2)
        assert np.array_equal(y1, y2)
        x3, _ = make_test_set(cfg, 8)
        assert x3.shape != x1.shape

    def test_calibrated_series_present(self):
        cfg = ExperimentConfig(
            experiment_id="EXP2", classifiers=("NCC",), sign_calibration=True
        )
        out = run_trial(cfg, 2, 10, 0)
        assert set(out) == {"NCC", CALIBRATED_NCC}

    def test_errors_in_unit_interval(self):
        cfg = ExperimentConfig(experiment_id="EXP3", test_per_class=200)
        out = run_trial(cfg, 4, 20, 0)
        for name, err in out.items():
            assert err is not None and 0.0 <= err <= 1.0, name


class TestRunExperiment:
    def small_config(self, **kw):
        base = dict(
            experiment_id="EXP1",
            dims=(2,),
            train_sizes=(10, 20),
            trials=5,
            test_per_class=100,
            classifiers=("NCC", "LDA"),
        )
        base.update(kw)
        return ExperimentConfig(**base)

    def test_row_order(self):
        rows = run_experiment(self.small_config())
        keys = [(r.classifier, r.p, r.n) for r in rows]
        assert keys == [
            ("NCC", 2, 10),
            ("NCC", 2, 20),
            ("LDA", 2, 10),
            ("LDA", 2, 20),
        ]

    def test_single_trial_degenerate_std(self):
        rows = run_experiment(self.small_config(trials=1))
        assert all(r.std_err == 0.0 and r.degenerate_std for r in rows)
        assert all(r.trials == 1 for r in rows)

    def test_mean_std_match_trials(self):
        cfg = self.small_config(classifiers=("LDA",), trials=7)
        rows = run_experiment(cfg)
        errs = [run_trial(cfg, 2, 10, t)["LDA"] for t in range(7)]
        row = next(r for r in rows if r.n == 10)
        assert row.mean_err == pytest.approx(float(np.mean(errs)), abs=0)
        assert row.std_err == pytest.approx(float(np.std(errs, ddof=1)), abs=0)

    def test_workers_do_not_change_results(self):
        cfg = self.small_config(trials=6)
        assert run_experiment(cfg, workers=1) == run_experiment(cfg, workers=2)

    def test_lda_improves_with_training_size(self):
        cfg = ExperimentConfig(
            experiment_id="EXP1",
            dims=(2, 4, 8, 16),
            train_sizes=(10, 200),
            trials=100,
            classifiers=("LDA",),
        )
        rows = {(r.p, r.n): r.mean_err for r in run_experiment(cfg, workers=2)}
        for p in cfg.dims:
            assert rows[(p, 200)] <= rows[(p, 10)]


class TestBayesError:
    def test_matches_quadrature(self):
        # Independent oracle: equal-prior error is the integral of the
        # smaller of the two class densities along the mean-difference axis.
        for p in (1, 2, 4, 8, 16):
            for c in (0.5, 1.0, 2.0):
                gap = c * math.sqrt(p)
                val, _ = integrate.quad(
                    lambda t: 0.5 * min(stats.norm.pdf(t), stats.norm.pdf(t - gap)),
                    -np.inf,
                    np.inf,
                )
                assert bayes_error_exp1(p, c) == pytest.approx(val, abs=1e-9)

    def test_frozen_values(self):
        assert bayes_error_exp1(4, 1.0) == pytest.approx(0.158655, abs=1e-6)
        assert bayes_error_exp1(16, 1.0) == pytest.approx(0.022750, abs=1e-6)

    def test_zero_separation(self):
        assert bayes_error_exp1(3, 0.0) == pytest.approx(0.5)

    def test_invalid_args(self):
        with pytest.raises(ValueError):
            bayes_error_exp1(0, 1.0)
        with pytest.raises(ValueError):
            bayes_error_exp1(2, -1.0)


class TestConfigValidation:
    def test_rejects_unknown_classifier(self):
        with pytest.raises(ValueError, match="classifiers"):
            ExperimentConfig(classifiers=("SVM",))

    def test_rejects_bad_experiment(self):
        with pytest.raises(ValueError, match="experiment"):
            ExperimentConfig(experiment_id="EXP0")

    def test_rejects_bad_sizes(self):
        with pytest.raises(ValueError):
            ExperimentConfig(train_sizes=())
        with pytest.raises(ValueError):
            ExperimentConfig(dims=(0,))
        with pytest.raises(ValueError):
            ExperimentConfig(trials=0)
