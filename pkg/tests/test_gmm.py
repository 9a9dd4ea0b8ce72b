"""EM fitting, BIC model choice, modality detection, bin assignment."""

import math

import numpy as np
import pytest

from canestat import (
    BIMODAL,
    UNIMODAL,
    Histogram,
    assign_components,
    bic,
    build_histogram,
    classify_modality,
    fit_gmm_1d,
)


def mixture_draws(rng, n, weight_low, mu, sigma):
    """Proper mixture sampling: component membership is Bernoulli per draw."""
    n_low = int(rng.binomial(n, weight_low))
    x = np.concatenate(
        [
            rng.normal(mu[0], sigma[0], n_low),
            rng.normal(mu[1], sigma[1], n - n_low),
        ]
    )
    rng.shuffle(x)
    return x


class TestFit:
    def test_k1_closed_form(self):
        rng = np.random.default_rng(0)
        x = rng.normal(5.0, 2.0, 400)
        fit = fit_gmm_1d(x, 1)
        assert fit.k == 1
        assert fit.weights.tolist() == [1.0]
        assert fit.means[0] == pytest.approx(x.mean(), abs=1e-12)
        assert fit.variances[0] == pytest.approx(max(x.var(), 1e-6), abs=1e-12)
        assert fit.converged

    def test_k1_variance_floored(self):
        fit = fit_gmm_1d(np.full(100, 2.0), 1, variance_floor=1e-4)
        assert fit.variances[0] == 1e-4

    def test_k2_recovers_known_mixture(self):
        rng = np.random.default_rng(1)
        x = np.concatenate(
            [rng.normal(100.0, 0.2, 5000), rng.normal(103.0, 0.3, 5000)]
        )
        fit = fit_gmm_1d(x, 2)
        assert fit.means[0] == pytest.approx(100.0, abs=0.05)
        assert fit.means[1] == pytest.approx(103.0, abs=0.05)
        assert fit.weights[0] == pytest.approx(0.5, abs=0.03)
        assert fit.weights[1] == pytest.approx(0.5, abs=0.03)

    def test_means_sorted_ascending(self):
        rng = np.random.default_rng(2)
        x = np.concatenate([rng.normal(10, 0.1, 500), rng.normal(2, 0.1, 500)])
        fit = fit_gmm_1d(x, 2)
        assert fit.means[0] < fit.means[1]

    def test_mirrored_sample_fits_symmetric_means(self):
        rng = np.random.default_rng(3)
        half = rng.normal(4.0, 0.3, 2000)
        center = 6.0
        x = np.concatenate([half, 2 * center - half])
        fit = fit_gmm_1d(x, 2)
        assert fit.means[0] + fit.means[1] == pytest.approx(2 * x.mean(), abs=1e-6)

    def test_weights_sum_to_one(self):
        for seed in range(30):
            rng = np.random.default_rng(seed)
            x = rng.normal(0, rng.uniform(0.1, 5), int(rng.integers(50, 500)))
            fit = fit_gmm_1d(x, 2)
            assert abs(fit.weights.sum() - 1.0) < 1e-12

    def test_monotone_log_likelihood(self):
        for seed in range(100):
            rng = np.random.default_rng(seed)
            w = rng.uniform(0.1, 0.9)
            x = mixture_draws(
                rng,
                int(rng.integers(100, 1500)),
                w,
                rng.uniform(-5, 5, 2),
                rng.uniform(0.05, 2, 2),
            )
            fit = fit_gmm_1d(x, 2)
            steps = np.diff(fit.ll_trace)
            assert steps.size == 0 or steps.min() >= -1e-9

    def test_deterministic_bit_identical(self):
        rng = np.random.default_rng(4)
        x = np.concatenate([rng.normal(0, 1, 800), rng.normal(6, 0.5, 400)])
        a = fit_gmm_1d(x, 2)
        b = fit_gmm_1d(x, 2)
        assert a.means.tobytes() == b.means.tobytes()
        assert a.variances.tobytes() == b.variances.tobytes()
        assert a.weights.tobytes() == b.weights.tobytes()
        assert a.log_likelihood == b.log_likelihood
        assert a.n_iterations == b.n_iterations

    def test_shift_equivariance(self):
        rng = np.random.default_rng(5)
        x = mixture_draws(rng, 3000, 0.4, (100.0, 102.5), (0.1, 0.2))
        base = fit_gmm_1d(x, 2)
        shifted = fit_gmm_1d(x + 7.0, 2)
        np.testing.assert_allclose(shifted.means, base.means + 7.0, atol=1e-9)
        np.testing.assert_allclose(shifted.weights, base.weights, atol=1e-9)
        np.testing.assert_allclose(shifted.variances, base.variances, atol=1e-9)

    def test_scale_equivariance(self):
        rng = np.random.default_rng(6)
        x = mixture_draws(rng, 3000, 0.4, (10.0, 12.5), (0.1, 0.2))
        c = 3.0
        base = fit_gmm_1d(x, 2)
        scaled = fit_gmm_1d(c * x, 2)
        np.testing.assert_allclose(scaled.means, c * base.means, rtol=1e-7)
        np.testing.assert_allclose(scaled.variances, c**2 * base.variances, rtol=1e-6)

    def test_rejects_bad_input(self):
        with pytest.raises(ValueError):
            fit_gmm_1d([1.0, np.nan], 2)
        with pytest.raises(ValueError):
            fit_gmm_1d([], 1)
        with pytest.raises(ValueError):
            fit_gmm_1d([1.0, 2.0], 3)


class TestBic:
    def test_k1_formula(self):
        from canestat import GmmFit

        fit = GmmFit(
            k=1,
            weights=np.array([1.0]),
            means=np.array([0.0]),
            variances=np.array([1.0]),
            log_likelihood=-50.0,
            n_iterations=0,
            converged=True,
            ll_trace=np.array([-50.0]),
        )
        assert bic(fit, 100) == pytest.approx(2 * math.log(100) + 100)

    def test_k2_parameter_count(self):
        rng = np.random.default_rng(0)
        x = rng.normal(0, 1, 100)
        f2 = fit_gmm_1d(x, 2)
        # BIC = p ln n - 2 LL with p = 5 for k=2
        assert bic(f2, 100) == pytest.approx(5 * math.log(100) - 2 * f2.log_likelihood)

    def test_separated_clusters_prefer_k2(self):
        rng = np.random.default_rng(7)
        x = mixture_draws(rng, 4000, 0.5, (0.0, 8.0), (0.5, 0.5))
        f1, f2 = fit_gmm_1d(x, 1), fit_gmm_1d(x, 2)
        assert bic(f2, x.size) < bic(f1, x.size)


class TestClassifyModality:
    def test_single_gaussian_unimodal(self):
        rng = np.random.default_rng(8)
        decision = classify_modality(rng.normal(100.0, 0.3, 5000))
        assert decision.modality == UNIMODAL

    def test_separated_mixture_bimodal(self):
        rng = np.random.default_rng(9)
        x = mixture_draws(rng, 6000, 0.3, (100.0, 103.0), (0.4, 0.4))
        decision = classify_modality(x)
        assert decision.modality == BIMODAL
        assert decision.bic_k1 - decision.bic_k2 > 10
        assert decision.separation > 2

    def test_constant_sample_unimodal(self):
        decision = classify_modality(np.full(300, 4.0))
        assert decision.modality == UNIMODAL
        assert decision.separation == 0.0

    def test_thresholds_respected(self):
        rng = np.random.default_rng(10)
        x = mixture_draws(rng, 6000, 0.3, (100.0, 103.0), (0.4, 0.4))
        strict = classify_modality(x, separation_threshold=1e6)
        assert strict.modality == UNIMODAL


class TestAssignComponents:
    def test_point_masses_split_cleanly(self):
        x = np.concatenate([np.zeros(500), np.full(500, 10.0)])
        x += np.linspace(-1e-3, 1e-3, 1000)  # avoid exactly-constant comps
        fit = fit_gmm_1d(x, 2)
        hist = build_histogram(x, n_bins=20)
        ground, canopy = assign_components(fit, hist)
        assert hist.centers[ground].max() < 5.0
        assert hist.centers[canopy].min() > 5.0
        occupied = set(np.flatnonzero(hist.counts > 0).tolist())
        assert set(ground.tolist()) | set(canopy.tolist()) == occupied
        assert not set(ground.tolist()) & set(canopy.tolist())

    def test_tie_goes_to_canopy(self):
        # symmetric fit: the center bin has exactly equal responsibility
        from canestat import GmmFit

        fit = GmmFit(
            k=2,
            weights=np.array([0.5, 0.5]),
            means=np.array([-1.0, 1.0]),
            variances=np.array([0.25, 0.25]),
            log_likelihood=0.0,
            n_iterations=0,
            converged=True,
            ll_trace=np.array([0.0]),
        )
        hist = Histogram(np.array([-2.0, -1.0, 1.0, 2.0]), np.array([5, 5, 5]))
        # centers: -1.5, 0.0, 1.5; the middle one ties exactly
        ground, canopy = assign_components(fit, hist)
        assert 1 in canopy.tolist()
        assert ground.tolist() == [0]

    @pytest.mark.parametrize("seed", range(30))
    def test_matches_posterior_oracle(self, seed):
        rng = np.random.default_rng(seed)
        x = mixture_draws(
            rng, 2000, rng.uniform(0.2, 0.8), np.sort(rng.uniform(0, 10, 2)), (0.5, 0.7)
        )
        fit = fit_gmm_1d(x, 2)
        hist = build_histogram(x)
        ground, canopy = assign_components(fit, hist)
        for i in np.flatnonzero(hist.counts > 0):
            c = hist.centers[i]
            post = [
                fit.weights[j]
                * math.exp(-((c - fit.means[j]) ** 2) / (2 * fit.variances[j]))
                / math.sqrt(2 * math.pi * fit.variances[j])
                for j in (0, 1)
            ]
            if post[1] >= post[0]:
                assert i in canopy
            else:
                assert i in ground

    def test_requires_k2(self):
        fit = fit_gmm_1d(np.random.default_rng(0).normal(0, 1, 100), 1)
        hist = build_histogram(np.random.default_rng(0).normal(0, 1, 100))
        with pytest.raises(ValueError):
            assign_components(fit, hist)
