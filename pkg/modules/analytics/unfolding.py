"""
谱展开模块：ω(ε) = ∫₀^ε σ_N(ε′) dε′

表格建在 u = √ε 的均匀网格上，硬边附近的 Bessel 振荡在 u 中近似等距。
相邻网格点之间用 Gauss–Legendre 面板积分，初始面板数按 σ_N 的振荡尺度
（[0, 4N] 上约 N 次振荡）设定，两种阶数结果不一致时面板数加倍。
插值用三次 Hermite 样条，导数 dω/du = 2u·σ_N(u²) 精确已知。
"""

import logging
import math

import numpy as np
from scipy.interpolate import CubicHermiteSpline
from scipy.special import roots_legendre

from modules.analytics.laguerre import LaguerreKernel, kernel, one_level_density
from modules.utils.errors import DomainError

logger = logging.getLogger(__name__)

PANEL_TOLERANCE = 1e-12
MAX_REFINEMENTS = 3
BISECTION_STEPS = 64


def support_edge(N: int) -> float:
    """表格上限：软边 4N 之外留出足够的 Airy 尾部"""
    return 4.0 * N + 30.0 * N ** (1.0 / 3.0) + 30.0


def _panel_integrals(K: LaguerreKernel, u: np.ndarray, order: int) -> np.ndarray:
    nodes, weights = roots_legendre(order)
    lo = u[:-1] ** 2
    hi = u[1:] ** 2
    half = (hi - lo)[:, None] / 2.0
    points = (lo + hi)[:, None] / 2.0 + half * nodes[None, :]
    return (one_level_density(K, points) * weights[None, :] * half).sum(axis=1)


class UnfoldingMap:
    """
    单调表格 (ε, ω)，构造后不可变

    Attributes:
        N: 系综维数
        u_grid: √ε 网格
        omega_grid: 对应的 ω
        eps_max: 表格上限
    """

    def __init__(self, N: int, u_grid: np.ndarray, omega_grid: np.ndarray, slopes: np.ndarray):
        self.N = N
        self.u_grid = u_grid
        self.omega_grid = omega_grid
        self.eps_max = float(u_grid[-1] ** 2)
        self._spline = CubicHermiteSpline(u_grid, omega_grid, slopes)
        for array in (self.u_grid, self.omega_grid):
            array.setflags(write=False)

    @property
    def omega_max(self) -> float:
        return float(self.omega_grid[-1])

    def omega_of_u(self, u: np.ndarray) -> np.ndarray:
        return self._spline(np.clip(u, 0.0, self.u_grid[-1]))

    def __repr__(self) -> str:
        return f"UnfoldingMap(N={self.N}, points={self.u_grid.size})"


def build_unfolding(K: LaguerreKernel) -> UnfoldingMap:
    """
    构造展开映射

    Args:
        K: Laguerre 核

    Returns:
        UnfoldingMap: 展开表格
    """
    eps_max = support_edge(K.N)
    points = int(math.ceil(60.0 * math.sqrt(K.N * eps_max))) + 200
    for _ in range(MAX_REFINEMENTS + 1):
        u = np.linspace(0.0, math.sqrt(eps_max), points)
        coarse = _panel_integrals(K, u, 8)
        fine = _panel_integrals(K, u, 16)
        if np.max(np.abs(fine - coarse)) < PANEL_TOLERANCE:
            break
        points *= 2
    else:
        logger.warning("展开表格在 %d 个点处仍未达到面板精度", points)

    omega = np.concatenate([[0.0], np.cumsum(fine)])
    slopes = 2.0 * u * one_level_density(K, u**2)
    logger.debug("展开表格: N=%d, 点数=%d, ω(ε_max)=%.12f", K.N, points, omega[-1])
    return UnfoldingMap(K.N, u, omega, slopes)


def unfold(unfolding: UnfoldingMap, eps):
    """
    ω(ε)；超出表格上限时取表格末值（≈ N）

    Args:
        unfolding: 展开映射
        eps: 非负 ε

    Returns:
        ω 值，与 eps 同形状
    """
    eps = np.asarray(eps, dtype=float)
    if np.any(eps < 0.0) or np.any(~np.isfinite(eps)):
        raise DomainError("ε 必须是非负有限数")
    values = unfolding.omega_of_u(np.sqrt(eps))
    return float(values) if values.ndim == 0 else values


def invert_unfold(unfolding: UnfoldingMap, omega):
    """
    ε(ω)：在表格区间内单调二分

    Args:
        unfolding: 展开映射
        omega: [0, N] 内的 ω

    Returns:
        ε 值，与 omega 同形状
    """
    omega = np.asarray(omega, dtype=float)
    if np.any(omega < 0.0) or np.any(omega > unfolding.N) or np.any(np.isnan(omega)):
        raise DomainError(f"ω 必须在 [0, {unfolding.N}] 内")
    target = np.minimum(omega, unfolding.omega_max)
    table = unfolding.omega_grid
    upper = np.clip(np.searchsorted(table, target, side="left"), 1, table.size - 1)
    lo = unfolding.u_grid[upper - 1].copy()
    hi = unfolding.u_grid[upper].copy()
    for _ in range(BISECTION_STEPS):
        mid = 0.5 * (lo + hi)
        below = unfolding.omega_of_u(mid) < target
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    eps = (0.5 * (lo + hi)) ** 2
    eps = np.where(target <= 0.0, 0.0, eps)
    return float(eps) if eps.ndim == 0 else eps


def renormalized_cluster(K: LaguerreKernel, unfolding: UnfoldingMap, omega1, omega2):
    """
    T̄₂(ω, ω′) = T₂(ε(ω), ε(ω′)) / √(R₁(ε(ω))·R₁(ε(ω′)))，R₁ = σ_N

    Raises:
        DomainError: 某个求值点的密度为零
    """
    if K.N != unfolding.N:
        raise DomainError(f"核 N={K.N} 与展开映射 N={unfolding.N} 不一致")
    e1, e2 = np.broadcast_arrays(
        np.asarray(invert_unfold(unfolding, omega1)),
        np.asarray(invert_unfold(unfolding, omega2)),
    )
    density = np.asarray(one_level_density(K, e1)) * np.asarray(one_level_density(K, e2))
    if np.any(density <= 0.0):
        raise DomainError("求值点处一能级密度为零")
    values = np.square(np.asarray(kernel(K, e1, e2))) / np.sqrt(density)
    return float(values) if values.ndim == 0 else values
