import math

import numpy as np
import pytest

from modules.dynamics.lattice import LatticeConfig, WaveFunction2D
from modules.schmidt.analysis import (
    ScaledSpectrum,
    SchmidtSpectrum,
    detect_saturation,
    scale_spectrum,
    schmidt_decompose,
    von_neumann_entropy,
)
from modules.utils.errors import DegenerateWindowError, DomainError


class TestSchmidtSpectrum:
    @pytest.mark.parametrize(
        "weights",
        [[], [0.5, 0.6], [0.2, 0.8], [1.1, -0.1], [np.nan, 1.0]],
    )
    def test_rejects_invalid(self, weights):
        with pytest.raises(DomainError):
            SchmidtSpectrum(weights)

    def test_entropy_bounds(self):
        assert von_neumann_entropy(SchmidtSpectrum([1.0, 0.0, 0.0])) == 0.0
        uniform = SchmidtSpectrum(np.full(16, 1 / 16))
        assert von_neumann_entropy(uniform) == pytest.approx(math.log(16), abs=1e-12)

    def test_entropy_of_two_level_mix(self):
        s = von_neumann_entropy(SchmidtSpectrum([0.75, 0.25]))
        assert s == pytest.approx(-(0.75 * math.log(0.75) + 0.25 * math.log(0.25)))


class TestSchmidtDecompose:
    def test_maximally_entangled_pair(self):
        psi = WaveFunction2D(0.5 * np.array([[1.0, 1.0], [1.0, -1.0]]), LatticeConfig(2))
        spectrum = schmidt_decompose(psi)
        np.testing.assert_allclose(spectrum.weights, [0.5, 0.5], rtol=1e-12)
        assert von_neumann_entropy(spectrum) == pytest.approx(math.log(2))

    def test_product_state(self):
        a = np.array([0.6, 0.8])
        b = np.array([1.0, 1.0j]) / math.sqrt(2)
        spectrum = schmidt_decompose(WaveFunction2D(np.outer(a, b), LatticeConfig(2)))
        np.testing.assert_allclose(spectrum.weights, [1.0, 0.0], atol=1e-12)


class TestScaleSpectrum:
    def test_trace(self):
        scaled = scale_spectrum(SchmidtSpectrum([0.5, 0.3, 0.2, 0.0]), 4)
        assert scaled.epsilons.sum() == pytest.approx(16.0)
        np.testing.assert_allclose(scaled.epsilons, [8.0, 4.8, 3.2, 0.0])

    def test_length_mismatch(self):
        with pytest.raises(DomainError):
            scale_spectrum(SchmidtSpectrum([1.0, 0.0]), 3)

    @pytest.mark.parametrize(
        "epsilons",
        [[8.0, 4.0, 4.0, 1.0], [4.0, 8.0, 4.0, 0.0], [17.0, -1.0, 0.0, 0.0], [np.inf, 0.0, 0.0, 0.0]],
    )
    def test_rejects_invalid(self, epsilons):
        with pytest.raises(DomainError):
            ScaledSpectrum(epsilons, 4)

    def test_accepts_trace_N_squared(self):
        assert ScaledSpectrum([8.0, 4.0, 4.0, 0.0], 4).epsilons.sum() == 16.0


class TestDetectSaturation:
    def test_ramp_then_plateau(self):
        series = np.minimum(0.1 * np.arange(200), 5.0)
        assert detect_saturation(series, 10, 1e-3) == 59

    def test_constant_series(self):
        assert detect_saturation(np.zeros(30), 10, 1e-3) == 9

    def test_never_saturates(self):
        assert detect_saturation(0.01 * np.arange(100), 10, 1e-3) is None

    @pytest.mark.parametrize("window,length", [(1, 10), (20, 10)])
    def test_degenerate_window(self, window, length):
        with pytest.raises(DegenerateWindowError):
            detect_saturation(np.zeros(length), window, 1e-3)
