"""
Laguerre 幺正系综的核函数模块

φ_k(ε) = e^{−ε/2}·L_k(ε)，L_k 为标准 Laguerre 多项式（权 e^{−ε} 下正交归一）。
递推直接作用在带权函数上：权重以对数尺度累积在递推内部，
L_k(ε) 单独计算会在大 ε、大 k 时溢出。
"""

from dataclasses import dataclass
from typing import Iterator

import numpy as np

from modules.utils.errors import DomainError

# 超过此值时把递推量整体缩回，差额记入对数尺度
_RESCALE_THRESHOLD = 1e100


def _as_eps(eps) -> np.ndarray:
    eps = np.asarray(eps, dtype=float)
    if np.any(~np.isfinite(eps)):
        raise DomainError("ε 必须是有限数")
    if np.any(eps < 0.0):
        raise DomainError("ε 必须非负")
    return eps


def iter_phi(kmax: int, eps) -> Iterator[np.ndarray]:
    """
    依次产出 φ_0(ε), …, φ_{kmax−1}(ε)

    递推 (k+1)L_{k+1} = (2k+1−ε)L_k − k·L_{k−1}，L_0 = 1，L_1 = 1−ε。

    Args:
        kmax: 产出的函数个数
        eps: 非负自变量（标量或数组）

    Yields:
        np.ndarray: 与 eps 同形状的 φ_k
    """
    eps = _as_eps(eps)
    log_scale = -eps / 2.0
    p_prev = np.zeros_like(eps)
    p = np.ones_like(eps)
    with np.errstate(divide="ignore"):
        for k in range(kmax):
            if k > 0:
                p_next = ((2 * k - 1 - eps) * p - (k - 1) * p_prev) / k
                p_prev, p = p, p_next
                big = np.abs(p) > _RESCALE_THRESHOLD
                if np.any(big):
                    shrink = np.where(big, 1.0 / _RESCALE_THRESHOLD, 1.0)
                    p = p * shrink
                    p_prev = p_prev * shrink
                    log_scale = log_scale - np.log(shrink)
            yield np.sign(p) * np.exp(np.log(np.abs(p)) + log_scale)


def phi_table(kmax: int, eps) -> np.ndarray:
    """
    一次递推得到全部 φ_k，k < kmax

    Returns:
        np.ndarray: 形状 (kmax, *eps.shape)
    """
    eps = _as_eps(eps)
    table = np.empty((kmax,) + eps.shape)
    for k, values in enumerate(iter_phi(kmax, eps)):
        table[k] = values
    return table


def phi(k: int, eps) -> np.ndarray | float:
    """
    φ_k(ε) = e^{−ε/2}·L_k(ε)

    Args:
        k: 阶数，≥ 0
        eps: 非负自变量

    Returns:
        φ_k 的值，标量输入返回 float
    """
    if k < 0:
        raise DomainError(f"阶数必须非负: {k}")
    eps = _as_eps(eps)
    for j, values in enumerate(iter_phi(k + 1, eps)):
        if j == k:
            return float(values) if values.ndim == 0 else values
    raise AssertionError("unreachable")


@dataclass(frozen=True)
class LaguerreKernel:
    """N 维 Laguerre 幺正系综的核 K_N"""

    N: int

    def __post_init__(self):
        if self.N < 1:
            raise DomainError(f"N 必须 ≥ 1: {self.N}")


def _scalar_or_array(values: np.ndarray):
    return float(values) if values.ndim == 0 else values


def kernel(K: LaguerreKernel, eps1, eps2):
    """
    K_N(ε, ε′) = Σ_{k<N} φ_k(ε)φ_k(ε′)，参数可广播
    """
    a, b = np.broadcast_arrays(_as_eps(eps1), _as_eps(eps2))
    total = np.zeros(a.shape)
    for fa, fb in zip(iter_phi(K.N, a), iter_phi(K.N, b)):
        total += fa * fb
    return _scalar_or_array(total)


def one_level_density(K: LaguerreKernel, eps):
    """σ_N(ε) = K_N(ε, ε)"""
    eps = _as_eps(eps)
    total = np.zeros(eps.shape)
    for values in iter_phi(K.N, eps):
        total += values**2
    return _scalar_or_array(total)


def two_level_cluster(K: LaguerreKernel, eps1, eps2):
    """T₂(ε1, ε2) = K_N(ε1, ε2)²"""
    return np.square(kernel(K, eps1, eps2))


def kernel_christoffel_darboux(K: LaguerreKernel, eps1, eps2):
    """
    Christoffel–Darboux 闭式 N·(φ_{N−1}(a)φ_N(b) − φ_N(a)φ_{N−1}(b))/(a − b)

    仅用于与直接求和对照，a = b 时无定义。
    """
    a, b = np.broadcast_arrays(_as_eps(eps1), _as_eps(eps2))
    if np.any(a == b):
        raise DomainError("Christoffel–Darboux 形式在 ε = ε′ 处无定义")
    ta = phi_table(K.N + 1, a)
    tb = phi_table(K.N + 1, b)
    values = K.N * (ta[K.N - 1] * tb[K.N] - ta[K.N] * tb[K.N - 1]) / (a - b)
    return _scalar_or_array(values)
