"""大样本验收测试：动力学系综与 LUE 解析结果的比较"""

import numpy as np
import pytest

from modules.analytics.laguerre import LaguerreKernel
from modules.analytics.surmise import wigner_surmise_gue_cdf
from modules.analytics.unfolding import build_unfolding
from modules.orchestrator.runner import run_entropy, run_simulate
from modules.orchestrator.tables import read_table
from modules.sampler.rmt import lue_mean_entropy
from modules.schmidt.analysis import detect_saturation
from modules.statistics.cluster import cluster_reference, estimate_renormalized_cluster
from modules.statistics.estimators import estimate_R1, ks_distance
from modules.statistics.spacing import spacing_distribution
from modules.utils.config import RunConfig

pytestmark = pytest.mark.slow


@pytest.fixture(scope="module")
def analytics_64():
    K = LaguerreKernel(64)
    return K, build_unfolding(K)


def simulate(tmp_path_factory, **kwargs):
    out = tmp_path_factory.mktemp("sim")
    cfg = RunConfig(N=64, count=2000, output_dir=out, n_jobs=1, **kwargs)
    return run_simulate(cfg)


@pytest.fixture(scope="module")
def strong_chaos(tmp_path_factory):
    return simulate(tmp_path_factory, k1=3.0, k2=2.5, cpp=0.05)


@pytest.fixture(scope="module")
def weak_chaos(tmp_path_factory):
    return simulate(tmp_path_factory, k1=0.7, k2=0.2, cpp=0.05)


def test_entropy_saturates_at_lue_mean(tmp_path):
    cfg = RunConfig(N=64, k1=3.0, k2=2.5, cpp=0.05, levels=3)
    _, _, data = read_table(run_entropy(cfg, 1000, tmp_path / "entropy.tsv"))
    entropy = data[:, 1]
    # 最大权重从 1 下降，其余从 0 增长
    assert data[-1, 2] < data[0, 2]
    assert data[100, 3] > data[0, 3]
    target = lue_mean_entropy(64, 400, seed=1)
    assert entropy[500:].mean() == pytest.approx(target, rel=0.05)


class TestEntropyGrowth:
    @pytest.fixture(scope="class")
    def entropy(self, tmp_path_factory):
        out = tmp_path_factory.mktemp("entropy")
        cfg = RunConfig(N=64, k1=3.0, k2=2.5, cpp=0.05, levels=1)
        _, _, data = read_table(run_entropy(cfg, 1000, out / "entropy.tsv"))
        return data[:, 1]

    def test_smoothed_rise_is_monotone(self, entropy):
        smoothed = np.convolve(entropy, np.ones(10) / 10, mode="valid")
        plateau = entropy[500:].mean()
        rise_end = int(np.argmax(smoothed >= 0.9 * plateau))
        assert rise_end > 0
        assert np.all(np.diff(smoothed[: rise_end + 1]) > -0.02)

    def test_saturation_is_stable(self, entropy):
        index = detect_saturation(entropy, 50, 2e-3)
        assert index is not None and index < 500
        after = entropy[index : index + 100].mean()
        assert after == pytest.approx(entropy[-200:].mean(), rel=0.02)


def test_strong_chaos_spacing_follows_surmise(strong_chaos, analytics_64):
    _, unfolding = analytics_64
    histogram = spacing_distribution(strong_chaos, unfolding)
    assert histogram.raw_mean == pytest.approx(1.0, rel=0.02)
    assert histogram.mean_spacing == pytest.approx(1.0, rel=0.02)
    assert ks_distance(histogram.samples, wigner_surmise_gue_cdf) < 0.05


def test_weak_chaos_shifts_to_small_spacings(strong_chaos, weak_chaos, analytics_64):
    _, unfolding = analytics_64
    strong = spacing_distribution(strong_chaos, unfolding)
    weak = spacing_distribution(weak_chaos, unfolding)
    # 弱混沌的展开能级在窗口内稀疏，缩放后才能比较形状
    assert weak.raw_mean > 1.5
    assert weak.mean_spacing == pytest.approx(1.0, rel=0.02)
    assert np.mean(weak.samples < 0.5) > np.mean(strong.samples < 0.5)


def test_strong_chaos_bulk_cluster(strong_chaos, analytics_64):
    K, unfolding = analytics_64
    edges = np.linspace(0.0, 4.0, 17)
    estimate = estimate_renormalized_cluster(strong_chaos, unfolding, "bulk", edges)
    reference = cluster_reference(K, unfolding, "bulk", estimate.centers[0])
    centers = estimate.centers[0]
    mask = (centers >= 0.25) & np.isfinite(estimate.errors) & (estimate.errors > 0)
    z = (estimate.values[mask] - reference[mask]) / estimate.errors[mask]
    assert np.max(np.abs(z)) <= 4.0


def test_weak_chaos_bulk_cluster_turns_negative(tmp_path_factory, analytics_64):
    _, unfolding = analytics_64
    weak = simulate(
        tmp_path_factory, k1=0.7, k2=0.2, cpp=0.05, initial="random", trajectories=200
    )
    edges = np.linspace(0.0, 8.0, 17)
    estimate = estimate_renormalized_cluster(weak, unfolding, "bulk", edges)
    mask = np.isfinite(estimate.errors) & (estimate.errors > 0)
    assert np.min(estimate.values[mask] / estimate.errors[mask]) < -3.0


def test_protocols_agree(tmp_path):
    common = dict(N=16, count=1000, stride=20, n_jobs=1, levels=1)
    single = run_simulate(RunConfig(output_dir=tmp_path / "single", **common))
    many = run_simulate(
        RunConfig(output_dir=tmp_path / "many", trajectories=1000, initial="random", **common)
    )
    edges = np.linspace(0.0, 60.0, 16)
    # 单轨迹上的谱前后相关，误差用批均值估计
    a, b = estimate_R1(single, edges, batches=25), estimate_R1(many, edges)
    combined = np.sqrt(a.errors**2 + b.errors**2)
    mask = (a.counts >= 50) & (b.counts >= 50)
    z = (a.values[mask] - b.values[mask]) / combined[mask]
    assert np.max(np.abs(z)) <= 3.0
