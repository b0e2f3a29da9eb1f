"""
轨迹状态管理模块
"""

from typing import List, Optional, TypedDict


class TrajectoryState(TypedDict):
    """一条轨迹的完整状态定义"""

    index: int
    seed: int
    # 初态中心 (x1, p1, x2, p2)
    center: List[float]

    # 预热阶段
    burn_in: int
    saturation_step: Optional[int]

    # 采集阶段
    target: int  # 需要采集的谱个数
    collected: int

    # 逐步记录的熵；权重只在需要写熵文件时记录
    entropies: List[float]
    leading_weights: List[List[float]]


def create_initial_state(
    index: int, seed: int, center: List[float], target: int
) -> TrajectoryState:
    """创建初始的轨迹状态"""
    return TrajectoryState(
        index=index,
        seed=seed,
        center=list(center),
        burn_in=0,
        saturation_step=None,
        target=target,
        collected=0,
        entropies=[],
        leading_weights=[],
    )


def record_step(
    state: TrajectoryState, entropy: float, weights: Optional[List[float]] = None
) -> TrajectoryState:
    """记录一步的熵与前几个 Schmidt 权重"""
    state["entropies"].append(entropy)
    if weights is not None:
        state["leading_weights"].append(list(weights))
    return state
