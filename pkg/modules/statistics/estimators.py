"""
直方图估计模块：R₁、R₂ 与 KS 距离
"""

import logging
from typing import Callable, Optional, Sequence, Tuple

import numpy as np

from modules.statistics.ensemble import SpectraEnsemble
from modules.utils.errors import DomainError, EmptyEnsembleError

logger = logging.getLogger(__name__)

# R₂ 分块时每块最多的配对数
PAIR_CHUNK = 2_000_000


class BinnedEstimate:
    """
    基于直方图的估计值

    Attributes:
        edges: 每个坐标轴的分箱边界
        coordinate: 坐标名称（"epsilon"、"omega" 或 "s"）
        counts: 每箱计数
        values: 归一化后的估计值
        errors: 每箱标准误差
        samples: 参与估计的谱个数
        overflow: 落在分箱范围之外的点数
    """

    def __init__(
        self,
        edges: Sequence[np.ndarray],
        coordinate: str,
        counts: np.ndarray,
        values: np.ndarray,
        errors: np.ndarray,
        samples: int,
        overflow: int = 0,
    ):
        self.edges = tuple(np.asarray(e, dtype=float) for e in edges)
        for e in self.edges:
            if e.ndim != 1 or e.size < 2 or np.any(np.diff(e) <= 0.0):
                raise DomainError("分箱边界必须严格递增且至少两个")
        shape = tuple(e.size - 1 for e in self.edges)
        self.counts = np.asarray(counts, dtype=float).reshape(shape)
        self.values = np.asarray(values, dtype=float).reshape(shape)
        self.errors = np.asarray(errors, dtype=float).reshape(shape)
        if not np.all(np.isfinite(self.values)):
            raise DomainError("估计值必须有限")
        if np.any(self.errors < 0.0) or np.any(np.isnan(self.errors)):
            raise DomainError("标准误差必须非负")
        self.coordinate = coordinate
        self.samples = samples
        self.overflow = overflow

    @property
    def centers(self) -> Tuple[np.ndarray, ...]:
        return tuple(0.5 * (e[1:] + e[:-1]) for e in self.edges)

    @property
    def widths(self) -> Tuple[np.ndarray, ...]:
        return tuple(np.diff(e) for e in self.edges)

    def integral(self) -> float:
        """Σ 值 × 箱体积"""
        volume = self.widths[0]
        for w in self.widths[1:]:
            volume = np.multiply.outer(volume, w)
        return float(np.sum(self.values * volume))


class HistogramAccumulator:
    """
    可合并的部分直方图，合并满足结合律

    Args:
        edges: 每个坐标轴的分箱边界
    """

    def __init__(self, edges: Sequence[np.ndarray]):
        self.edges = tuple(np.asarray(e, dtype=float) for e in edges)
        self.counts = np.zeros(tuple(e.size - 1 for e in self.edges))
        self.samples = 0
        self.overflow = 0

    def add(self, coords: Sequence[np.ndarray], samples: int) -> "HistogramAccumulator":
        points = np.column_stack([np.ravel(c) for c in coords])
        hist, _ = np.histogramdd(points, bins=self.edges)
        self.counts += hist
        self.samples += samples
        self.overflow += points.shape[0] - int(hist.sum())
        return self

    def merge(self, other: "HistogramAccumulator") -> "HistogramAccumulator":
        if len(self.edges) != len(other.edges) or not all(
            np.array_equal(a, b) for a, b in zip(self.edges, other.edges)
        ):
            raise DomainError("只能合并分箱相同的直方图")
        merged = HistogramAccumulator(self.edges)
        merged.counts = self.counts + other.counts
        merged.samples = self.samples + other.samples
        merged.overflow = self.overflow + other.overflow
        return merged

    def to_estimate(self, coordinate: str) -> BinnedEstimate:
        if self.samples == 0:
            raise EmptyEnsembleError("没有样本")
        volume = np.diff(self.edges[0])
        for e in self.edges[1:]:
            volume = np.multiply.outer(volume, np.diff(e))
        scale = self.samples * volume
        return BinnedEstimate(
            self.edges,
            coordinate,
            self.counts,
            self.counts / scale,
            np.sqrt(self.counts) / scale,
            self.samples,
            self.overflow,
        )


def default_epsilon_edges(ens: SpectraEnsemble, bins: int = 100) -> np.ndarray:
    """覆盖全部 ε 的等宽分箱"""
    top = float(ens.spectra.max()) if len(ens) else 1.0
    return np.linspace(0.0, top * (1.0 + 1e-9) + 1e-12, bins + 1)


def estimate_R1(
    ens: SpectraEnsemble,
    edges: Optional[np.ndarray] = None,
    batches: Optional[int] = None,
) -> BinnedEstimate:
    """
    一能级密度 R₁(ε) 的直方图估计：计数 / (样本数 × 箱宽)

    分箱覆盖全部 ε 时积分恰为 N。给出 batches 时，误差取 Poisson 误差与
    批均值误差中的较大者，用于同一轨迹上前后相关的谱。

    Args:
        ens: 谱系综
        edges: ε 分箱边界，默认 100 个等宽箱
        batches: 按谱顺序切成的连续批数，≥ 2

    Returns:
        BinnedEstimate: R₁ 估计
    """
    if len(ens) == 0:
        raise EmptyEnsembleError("系综为空")
    if edges is None:
        edges = default_epsilon_edges(ens)
    chunk = max(1, PAIR_CHUNK // ens.N)
    partials = [
        HistogramAccumulator([edges]).add([block], block.shape[0])
        for block in np.array_split(ens.spectra, max(1, -(-len(ens) // chunk)))
    ]
    total = partials[0]
    for part in partials[1:]:
        total = total.merge(part)
    estimate = total.to_estimate("epsilon")
    if batches is None:
        return estimate
    errors = np.maximum(estimate.errors, batch_means_errors(ens, edges, batches))
    return BinnedEstimate(
        estimate.edges,
        estimate.coordinate,
        estimate.counts,
        estimate.values,
        errors,
        estimate.samples,
        estimate.overflow,
    )


def batch_means_errors(ens: SpectraEnsemble, edges: np.ndarray, batches: int) -> np.ndarray:
    """
    R₁ 的批均值标准误差

    把谱按存储顺序切成 batches 个连续批，各批分别估计 R₁，
    误差为批间标准差 / √batches。批长远大于相关时间时各批近似独立。

    Args:
        ens: 谱系综
        edges: ε 分箱边界
        batches: 批数

    Returns:
        np.ndarray: 每箱标准误差
    """
    if not 2 <= batches <= len(ens):
        raise DomainError(f"批数必须在 [2, {len(ens)}] 内: {batches}")
    edges = np.asarray(edges, dtype=float)
    widths = np.diff(edges)
    values = np.stack(
        [
            np.histogram(block, bins=edges)[0] / (block.shape[0] * widths)
            for block in np.array_split(ens.spectra, batches)
        ]
    )
    return values.std(axis=0, ddof=1) / np.sqrt(batches)


def _ordered_pairs(block: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    n = block.shape[1]
    off = ~np.eye(n, dtype=bool)
    first = np.broadcast_to(block[:, :, None], (block.shape[0], n, n))[:, off]
    second = np.broadcast_to(block[:, None, :], (block.shape[0], n, n))[:, off]
    return first, second


def estimate_R2(
    ens: SpectraEnsemble,
    edges1: Optional[np.ndarray] = None,
    edges2: Optional[np.ndarray] = None,
) -> BinnedEstimate:
    """
    二能级关联 R₂(ε, ε′) 的二维直方图估计

    统计每个谱内全部有序对 (i ≠ j)，除以样本数与箱面积，积分为 N(N−1)。

    Args:
        ens: 谱系综
        edges1: 第一个坐标的分箱
        edges2: 第二个坐标的分箱，默认与 edges1 相同

    Returns:
        BinnedEstimate: 二维 R₂ 估计
    """
    if len(ens) == 0:
        raise EmptyEnsembleError("系综为空")
    if ens.N < 2:
        raise DomainError("R₂ 需要 N ≥ 2")
    if edges1 is None:
        edges1 = default_epsilon_edges(ens, bins=50)
    if edges2 is None:
        edges2 = edges1
    chunk = max(1, PAIR_CHUNK // (ens.N * ens.N))
    total = HistogramAccumulator([edges1, edges2])
    for start in range(0, len(ens), chunk):
        block = ens.spectra[start : start + chunk]
        part = HistogramAccumulator([edges1, edges2]).add(_ordered_pairs(block), block.shape[0])
        total = total.merge(part)
    return total.to_estimate("epsilon")


def ks_distance(data, reference_cdf: Callable[[np.ndarray], np.ndarray]) -> float:
    """
    经验分布与参考分布的 sup 距离

    Args:
        data: 样本数组，或带 edges/density 的间距直方图
        reference_cdf: 参考累积分布函数

    Returns:
        float: [0, 1] 内的 KS 距离
    """
    if hasattr(data, "density") and hasattr(data, "edges"):
        edges = np.asarray(data.edges, dtype=float)
        empirical = np.concatenate([[0.0], np.cumsum(data.density * np.diff(edges))])
        distance = float(np.max(np.abs(empirical - reference_cdf(edges))))
        return min(max(distance, 0.0), 1.0)

    samples = np.sort(np.ravel(np.asarray(data, dtype=float)))
    n = samples.size
    if n == 0:
        raise EmptyEnsembleError("KS 距离至少需要一个样本")
    cdf = np.asarray(reference_cdf(samples), dtype=float)
    upper = np.arange(1, n + 1) / n - cdf
    lower = cdf - np.arange(0, n) / n
    distance = float(max(upper.max(), lower.max()))
    return min(max(distance, 0.0), 1.0)
