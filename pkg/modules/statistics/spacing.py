"""
展开后最近邻间距分布
"""

import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from modules.analytics.unfolding import UnfoldingMap, unfold
from modules.statistics.ensemble import SpectraEnsemble
from modules.utils.errors import DimensionMismatchError, DomainError, EmptyWindowError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SpacingHistogram:
    """
    间距直方图

    Attributes:
        edges: 分箱边界
        density: 在范围内样本上归一化的密度
        counts: 每箱计数
        samples: 全部间距样本，已缩放到单位均值
        window: 采样所用的 ω 窗口
        overflow: 超出分箱范围的间距数
        raw_mean: 缩放前窗口内的平均展开间距
    """

    edges: np.ndarray
    density: np.ndarray
    counts: np.ndarray
    samples: np.ndarray
    window: Tuple[float, float]
    overflow: int
    raw_mean: float = 1.0

    @property
    def sample_count(self) -> int:
        return int(self.samples.size)

    @property
    def mean_spacing(self) -> float:
        return float(self.samples.mean())

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.edges[1:] + self.edges[:-1])


def default_window(N: int) -> Tuple[float, float]:
    """N > 20 时取 [10, N − 10]，否则取中间一半"""
    if N > 20:
        return 10.0, N - 10.0
    return N / 4.0, 3.0 * N / 4.0


def spacing_distribution(
    ens: SpectraEnsemble,
    unfolding: UnfoldingMap,
    window: Optional[Tuple[float, float]] = None,
    edges: Optional[np.ndarray] = None,
) -> SpacingHistogram:
    """
    相邻两能级都在窗口内时，记录其展开间距

    窗口内的间距再除以它们的均值。解析展开只在谱与 LUE 平均密度一致时给出
    单位均值，弱混沌下熵远低于 LUE 平均，展开能级在窗口内稀疏，原始均值
    可达 2 以上；原始均值保存在 raw_mean 中。

    Args:
        ens: 谱系综
        unfolding: 展开映射
        window: ω 窗口
        edges: 间距分箱，默认 [0, 5] 上宽 0.1

    Returns:
        SpacingHistogram: 间距直方图

    Raises:
        EmptyWindowError: 窗口内没有任何间距
    """
    if ens.N != unfolding.N:
        raise DimensionMismatchError(f"系综 N={ens.N} 与展开映射 N={unfolding.N} 不一致")
    lo, hi = default_window(ens.N) if window is None else (float(window[0]), float(window[1]))
    if not 0.0 <= lo < hi <= ens.N:
        raise DomainError(f"窗口 [{lo}, {hi}] 必须在 [0, {ens.N}] 内")
    edges = np.linspace(0.0, 5.0, 51) if edges is None else np.asarray(edges, dtype=float)
    if edges.ndim != 1 or edges.size < 2 or np.any(np.diff(edges) <= 0.0):
        raise DomainError("间距分箱边界必须严格递增")

    if len(ens) == 0:
        raise EmptyWindowError("系综为空")
    levels = np.sort(np.asarray(unfold(unfolding, ens.spectra)).reshape(ens.spectra.shape), axis=1)
    left, right = levels[:, :-1], levels[:, 1:]
    inside = (left >= lo) & (right <= hi)
    samples = (right - left)[inside]
    if samples.size == 0:
        raise EmptyWindowError(f"窗口 [{lo}, {hi}] 内没有间距")
    raw_mean = float(samples.mean())
    if raw_mean <= 0.0:
        raise EmptyWindowError(f"窗口 [{lo}, {hi}] 内的间距全为零")
    samples = samples / raw_mean

    counts, _ = np.histogram(samples, bins=edges)
    in_range = int(counts.sum())
    density = counts / (max(in_range, 1) * np.diff(edges))
    logger.debug("间距样本 %d 个，原始均值 %.4f", samples.size, raw_mean)
    return SpacingHistogram(
        edges=edges,
        density=density,
        counts=counts,
        samples=samples,
        window=(lo, hi),
        overflow=int(samples.size - in_range),
        raw_mean=raw_mean,
    )
