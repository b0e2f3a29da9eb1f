"""
重整化二能级簇函数 T̄₂ 的经验估计与解析参考

估计在展开坐标 ω 中进行。展开后的密度 R̃₁ ≈ 1，先求单位密度的簇函数
(R̃₁R̃₁′ − R̃₂)/√(R̃₁R̃₁′)，再乘 √(σ_N(ε(ω))·σ_N(ε(ω′))) 换回 T̄₂ 的归一化。

三种区域：
    hard: 以最小能级为参考（ω′ ∈ [0, hard_window]），横轴为伙伴能级的 ω
    soft: 以最大能级为参考（ω′ ∈ [N − soft_window, N]），横轴为 N − ω
    bulk: 参考能级落在 [bulk_lo, bulk_hi] 的单元内，横轴为间隔 ω − ω′
"""

import logging
import math
from dataclasses import dataclass
from typing import Literal, Optional, Tuple

import numpy as np

from modules.analytics.laguerre import LaguerreKernel, one_level_density
from modules.analytics.unfolding import (
    UnfoldingMap,
    invert_unfold,
    renormalized_cluster,
    unfold,
)
from modules.statistics.ensemble import SpectraEnsemble
from modules.statistics.estimators import PAIR_CHUNK, BinnedEstimate
from modules.utils.errors import (
    DimensionMismatchError,
    DomainError,
    EmptyEnsembleError,
    EmptyWindowError,
)

logger = logging.getLogger(__name__)

Regime = Literal["hard", "bulk", "soft"]

# 解析参考在条件窗口内取平均的锚点数
ANCHOR_POINTS = 5
# 体区解析参考每个单元内的取样点数
BULK_SUBSAMPLES = 4


@dataclass(frozen=True)
class ClusterWindows:
    """各区域的条件窗口"""

    hard_window: float = 0.05
    soft_window: float = 0.05
    bulk_lo: float = 10.0
    bulk_hi: Optional[float] = None
    ref_width: float = 1.0

    def bulk_range(self, N: int) -> Tuple[float, float]:
        hi = N - 10.0 if self.bulk_hi is None else self.bulk_hi
        if self.bulk_hi is None and N <= 20:
            raise EmptyWindowError(f"N={N} 太小，没有体区")
        if not 0.0 <= self.bulk_lo < hi <= N:
            raise EmptyWindowError(f"体区窗口 [{self.bulk_lo}, {hi}] 无效")
        return self.bulk_lo, hi


def _density_at(K: LaguerreKernel, unfolding: UnfoldingMap, omega) -> np.ndarray:
    return np.asarray(one_level_density(K, invert_unfold(unfolding, omega)), dtype=float)


def _count_between(levels: np.ndarray, lo, hi) -> np.ndarray:
    return np.searchsorted(levels, hi, side="left") - np.searchsorted(levels, lo, side="left")


def _unit_cluster(P, R2, var_P, var_R2):
    """单位密度簇函数及其误差（P = R̃₁R̃₁′），P ≤ 0 处无定义"""
    valid = P > 0.0
    safe = np.where(valid, P, 1.0)
    value = np.where(valid, (safe - R2) / np.sqrt(safe), 0.0)
    slope = (safe + R2) / (2.0 * safe**1.5)
    variance = np.where(valid, var_R2 / safe + slope**2 * var_P, 0.0)
    return value, np.sqrt(variance), valid


def _relative_var(counts: np.ndarray) -> np.ndarray:
    return np.where(counts > 0, 1.0 / np.maximum(counts, 1), 0.0)


def _edge_estimate(
    K: LaguerreKernel,
    unfolding: UnfoldingMap,
    levels: np.ndarray,
    omega_edges: np.ndarray,
    regime: Regime,
    window: float,
) -> BinnedEstimate:
    samples, N = levels.shape
    flat = np.sort(levels.ravel())
    widths = np.diff(omega_edges)
    centers = 0.5 * (omega_edges[1:] + omega_edges[:-1])

    if regime == "hard":
        refs = levels[:, 0] <= window
        partners = levels[refs, 1:].ravel()
        anchor = 0.5 * window
        lo_b, hi_b = omega_edges[:-1], omega_edges[1:]
    else:
        refs = levels[:, -1] >= N - window
        partners = (N - levels[refs, :-1]).ravel()
        anchor = N - 0.5 * window
        lo_b, hi_b = N - omega_edges[1:], N - omega_edges[:-1]

    n_ref = int(refs.sum())
    if n_ref == 0:
        side = "最小" if regime == "hard" else "最大"
        raise EmptyWindowError(f"没有谱的{side}能级落在条件窗口内")
    logger.debug("%s 区: %d/%d 个谱满足条件", regime, n_ref, samples)

    pair_counts, _ = np.histogram(partners, bins=omega_edges)
    level_counts = _count_between(flat, lo_b, hi_b)

    R1_ref = n_ref / (samples * window)
    R1_bin = level_counts / (samples * widths)
    R2 = pair_counts / (samples * window * widths)
    P = R1_ref * R1_bin
    var_P = P**2 * (1.0 / n_ref + _relative_var(level_counts))
    var_R2 = pair_counts / (samples * window * widths) ** 2
    unit, unit_err, valid = _unit_cluster(P, R2, var_P, var_R2)

    partner_omega = centers if regime == "hard" else N - centers
    factor = np.sqrt(
        _density_at(K, unfolding, anchor)
        * _density_at(K, unfolding, np.clip(partner_omega, 0.0, N))
    )
    errors = np.where(valid, unit_err * factor, np.inf)
    return BinnedEstimate(
        [omega_edges],
        "omega",
        pair_counts,
        unit * factor,
        errors,
        samples,
        overflow=int(partners.size - pair_counts.sum()),
    )


def _bulk_estimate(
    K: LaguerreKernel,
    unfolding: UnfoldingMap,
    levels: np.ndarray,
    omega_edges: np.ndarray,
    windows: ClusterWindows,
) -> BinnedEstimate:
    samples, N = levels.shape
    lo, hi = windows.bulk_range(N)
    n_cells = max(1, int(math.ceil((hi - lo) / windows.ref_width - 1e-9)))
    cell_edges = np.linspace(lo, hi, n_cells + 1)
    cell_width = np.diff(cell_edges)
    cell_centers = 0.5 * (cell_edges[1:] + cell_edges[:-1])
    sep_width = np.diff(omega_edges)
    sep_centers = 0.5 * (omega_edges[1:] + omega_edges[:-1])

    pair_counts = np.zeros((n_cells, sep_width.size))
    upper = np.triu(np.ones((N, N), dtype=bool), k=1)
    chunk = max(1, PAIR_CHUNK // (N * N))
    overflow = 0
    for start in range(0, samples, chunk):
        block = levels[start : start + chunk]
        first = np.broadcast_to(block[:, :, None], (block.shape[0], N, N))[:, upper]
        sep = (block[:, None, :] - block[:, :, None])[:, upper]
        inside = (first >= lo) & (first <= hi)
        hist, _, _ = np.histogram2d(first[inside], sep[inside], bins=[cell_edges, omega_edges])
        pair_counts += hist
        overflow += int(inside.sum() - hist.sum())

    flat = np.sort(levels.ravel())
    n_ref = _count_between(flat, cell_edges[:-1], cell_edges[1:]).astype(float)
    shift_lo = cell_edges[:-1, None] + sep_centers[None, :]
    shift_hi = cell_edges[1:, None] + sep_centers[None, :]
    n_shift = _count_between(flat, shift_lo, shift_hi).astype(float)

    area = samples * cell_width[:, None] * sep_width[None, :]
    R1_ref = (n_ref / (samples * cell_width))[:, None]
    R1_shift = n_shift / (samples * cell_width[:, None])
    R2 = pair_counts / area
    P = R1_ref * R1_shift
    var_P = P**2 * (_relative_var(n_ref)[:, None] + _relative_var(n_shift))
    unit, unit_err, valid = _unit_cluster(P, R2, var_P, pair_counts / area**2)

    shifted = cell_centers[:, None] + sep_centers[None, :]
    valid &= shifted <= N
    factor = np.sqrt(
        _density_at(K, unfolding, cell_centers)[:, None]
        * _density_at(K, unfolding, np.where(valid, shifted, cell_centers[:, None]))
    )
    used = valid.sum(axis=0)
    values = np.where(
        used > 0,
        np.sum(np.where(valid, unit * factor, 0.0), axis=0) / np.maximum(used, 1),
        0.0,
    )
    errors = np.where(
        used > 0,
        np.sqrt(np.sum(np.where(valid, (unit_err * factor) ** 2, 0.0), axis=0))
        / np.maximum(used, 1),
        np.inf,
    )
    logger.debug("体区: %d 个参考单元, 窗口 [%.2f, %.2f]", n_cells, lo, hi)
    return BinnedEstimate(
        [omega_edges],
        "omega",
        pair_counts.sum(axis=0),
        values,
        errors,
        samples,
        overflow=overflow,
    )


def estimate_renormalized_cluster(
    ens: SpectraEnsemble,
    unfolding: UnfoldingMap,
    regime: Regime,
    omega_edges: np.ndarray,
    windows: Optional[ClusterWindows] = None,
) -> BinnedEstimate:
    """
    经验 T̄₂

    Args:
        ens: 谱系综
        unfolding: 与系综同 N 的展开映射
        regime: "hard"、"bulk" 或 "soft"
        omega_edges: ω（或间隔）的分箱边界
        windows: 条件窗口，默认 ClusterWindows()

    Returns:
        BinnedEstimate: 每箱的 T̄₂ 与标准误差；无数据的箱误差为 inf

    Raises:
        DimensionMismatchError: 系综与展开映射的 N 不同
        EmptyWindowError: 条件窗口内没有参考能级
    """
    if ens.N != unfolding.N:
        raise DimensionMismatchError(f"系综 N={ens.N} 与展开映射 N={unfolding.N} 不一致")
    if len(ens) == 0:
        raise EmptyEnsembleError("系综为空")
    omega_edges = np.asarray(omega_edges, dtype=float)
    if omega_edges.ndim != 1 or omega_edges.size < 2 or np.any(np.diff(omega_edges) <= 0.0):
        raise DomainError("ω 分箱边界必须严格递增")
    if omega_edges[0] < 0.0 or omega_edges[-1] > ens.N:
        raise DomainError(f"ω 分箱必须在 [0, {ens.N}] 内")
    windows = windows or ClusterWindows()

    K = LaguerreKernel(ens.N)
    levels = np.sort(np.asarray(unfold(unfolding, ens.spectra)).reshape(ens.spectra.shape), axis=1)
    if regime == "hard":
        return _edge_estimate(K, unfolding, levels, omega_edges, "hard", windows.hard_window)
    if regime == "soft":
        return _edge_estimate(K, unfolding, levels, omega_edges, "soft", windows.soft_window)
    if regime == "bulk":
        return _bulk_estimate(K, unfolding, levels, omega_edges, windows)
    raise DomainError(f"未知区域: {regime}")


def cluster_reference(
    K: LaguerreKernel,
    unfolding: UnfoldingMap,
    regime: Regime,
    omega_centers: np.ndarray,
    windows: Optional[ClusterWindows] = None,
) -> np.ndarray:
    """
    与 estimate_renormalized_cluster 对应的解析 T̄₂

    边区在条件窗口内的锚点上取平均，体区在 [bulk_lo, bulk_hi] 上对参考位置取平均。

    Args:
        K: Laguerre 核
        unfolding: 展开映射
        regime: "hard"、"bulk" 或 "soft"
        omega_centers: 横轴取值

    Returns:
        np.ndarray: 解析参考值
    """
    windows = windows or ClusterWindows()
    x = np.asarray(omega_centers, dtype=float)
    N = unfolding.N

    if regime in ("hard", "soft"):
        width = windows.hard_window if regime == "hard" else windows.soft_window
        offsets = (np.arange(ANCHOR_POINTS) + 0.5) * width / ANCHOR_POINTS
        if regime == "hard":
            anchors, partners = offsets, x
        else:
            anchors, partners = N - offsets, N - x
        grid = renormalized_cluster(
            K, unfolding, anchors[:, None], np.clip(partners, 0.0, N)[None, :]
        )
        return np.asarray(grid).mean(axis=0)

    if regime == "bulk":
        lo, hi = windows.bulk_range(N)
        n_points = max(1, int(math.ceil((hi - lo) / windows.ref_width - 1e-9))) * BULK_SUBSAMPLES
        anchors = lo + (np.arange(n_points) + 0.5) * (hi - lo) / n_points
        partners = anchors[:, None] + x[None, :]
        inside = partners <= N
        grid = renormalized_cluster(
            K, unfolding, anchors[:, None], np.where(inside, partners, anchors[:, None])
        )
        grid = np.where(inside, grid, 0.0)
        return grid.sum(axis=0) / np.maximum(inside.sum(axis=0), 1)

    raise DomainError(f"未知区域: {regime}")
