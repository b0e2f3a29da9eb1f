import math

import numpy as np
import pytest
from scipy import linalg

from modules.analytics.unfolding import unfold
from modules.analytics.surmise import wigner_surmise_gue_cdf
from modules.sampler.rmt import (
    SamplerConfig,
    lue_mean_entropy,
    sample_ginibre,
    sample_gue_unfolded_spacings,
    sample_lue_ensemble,
    sample_lue_spectrum,
    spectrum_from_matrix,
    stream_rng,
)
from modules.sampler.synthetic import synthetic_poisson_ensemble
from modules.statistics.estimators import ks_distance
from modules.utils.errors import DomainError


def page_entropy(N: int) -> float:
    """N×N 随机纯态的平均纠缠熵"""
    return sum(1.0 / k for k in range(N + 1, N * N + 1)) - (N - 1) / (2.0 * N)


class TestLueSampler:
    def test_spectrum_shape_and_order(self):
        eps = sample_lue_spectrum(SamplerConfig(N=6), stream_rng(0, 0))
        assert eps.shape == (6,)
        assert np.all(eps >= 0.0)
        assert np.all(np.diff(eps) <= 0.0)

    def test_fixed_trace(self):
        spectra = sample_lue_ensemble(SamplerConfig(N=5, seed=2, fixed_trace=True), 20)
        np.testing.assert_allclose(spectra.sum(axis=1), 25.0, rtol=1e-12)

    def test_gaussian_trace_mean(self):
        spectra = sample_lue_ensemble(SamplerConfig(N=8, seed=4), 2000)
        assert spectra.sum(axis=1).mean() == pytest.approx(64.0, abs=1.0)

    def test_single_level_is_exponential(self):
        spectra = sample_lue_ensemble(SamplerConfig(N=1, seed=9), 4000)
        assert spectra.mean() == pytest.approx(1.0, abs=0.08)

    def test_independent_of_worker_count(self):
        cfg = SamplerConfig(N=4, seed=123)
        serial = sample_lue_ensemble(cfg, 300, n_jobs=1)
        parallel = sample_lue_ensemble(cfg, 300, n_jobs=2)
        assert np.array_equal(serial, parallel)

    def test_prefix_stable(self):
        cfg = SamplerConfig(N=4, seed=5)
        assert np.array_equal(sample_lue_ensemble(cfg, 10), sample_lue_ensemble(cfg, 300)[:10])

    def test_scale_covariance(self):
        g = sample_ginibre(6, stream_rng(1, 0))
        np.testing.assert_allclose(
            spectrum_from_matrix(3.0 * g), 9.0 * spectrum_from_matrix(g), rtol=1e-12
        )

    @pytest.mark.parametrize("N", [1, 2, 5, 8])
    def test_matches_wishart_eigenvalues(self, N):
        for index in range(5):
            g = sample_ginibre(N, stream_rng(17, index))
            wishart = linalg.eigvalsh(g @ g.conj().T)[::-1]
            eps = sample_lue_spectrum(SamplerConfig(N=N, seed=17), stream_rng(17, index))
            np.testing.assert_allclose(eps, wishart, rtol=1e-10, atol=1e-10)

    def test_rejects_empty_request(self):
        with pytest.raises(DomainError):
            sample_lue_ensemble(SamplerConfig(N=4), 0)

    def test_config_validation(self):
        with pytest.raises(ValueError):
            SamplerConfig(N=0)


class TestMeanEntropy:
    def test_matches_random_state_average(self):
        assert lue_mean_entropy(8, 500, seed=3) == pytest.approx(page_entropy(8), abs=0.03)

    def test_below_maximum(self):
        assert lue_mean_entropy(16, 100, seed=1) < math.log(16)


class TestGueSpacings:
    def test_unit_mean_and_surmise(self):
        spacings = sample_gue_unfolded_spacings(32, 200, np.random.default_rng(0))
        assert spacings.mean() == pytest.approx(1.0, abs=0.05)
        assert ks_distance(spacings, wigner_surmise_gue_cdf) < 0.06

    def test_small_matrices_rejected(self):
        with pytest.raises(DomainError):
            sample_gue_unfolded_spacings(4, 10, np.random.default_rng(0))


class TestSyntheticPoisson:
    def test_uniform_after_unfolding(self, unfolding_8):
        ens = synthetic_poisson_ensemble(unfolding_8, 500, seed=2)
        assert ens.metadata.source == "synthetic"
        assert len(ens) == 500
        omega = unfold(unfolding_8, ens.spectra)
        assert omega.mean() == pytest.approx(4.0, abs=0.15)
        assert np.all(np.diff(ens.spectra, axis=1) <= 0.0)

    def test_deterministic(self, unfolding_8):
        a = synthetic_poisson_ensemble(unfolding_8, 5, seed=1)
        b = synthetic_poisson_ensemble(unfolding_8, 5, seed=1)
        assert np.array_equal(a.spectra, b.spectra)
