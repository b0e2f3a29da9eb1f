"""
运行编排模块：simulate / rmt-sample / analyze / entropy

每条轨迹的随机性只来自 master_seed + 轨迹序号，
轨迹在 joblib 进程池中并行，结果按序号合并后由主进程写文件。
"""

import logging
import math
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np
from joblib import Parallel, delayed

from modules.analytics.laguerre import LaguerreKernel, one_level_density
from modules.analytics.surmise import wigner_surmise_gue, wigner_surmise_gue_cdf
from modules.analytics.unfolding import build_unfolding
from modules.dynamics.kicked_pair import build_coherent_product, evolve
from modules.dynamics.lattice import (
    CoherentStateSpec,
    SystemParams,
    WaveFunction2D,
)
from modules.orchestrator.tables import write_table
from modules.sampler.rmt import SamplerConfig, sample_lue_ensemble
from modules.schmidt.analysis import (
    detect_saturation,
    schmidt_decompose,
    scale_spectrum,
    von_neumann_entropy,
)
from modules.statistics.cluster import (
    ClusterWindows,
    cluster_reference,
    estimate_renormalized_cluster,
)
from modules.statistics.ensemble import (
    EnsembleMetadata,
    SpectraEnsemble,
    read_ensemble,
    write_ensemble,
)
from modules.statistics.estimators import (
    default_epsilon_edges,
    estimate_R1,
    ks_distance,
)
from modules.statistics.spacing import spacing_distribution
from modules.utils.config import RunConfig
from modules.utils.errors import DimensionMismatchError, DomainError
from modules.utils.state import TrajectoryState, create_initial_state, record_step

logger = logging.getLogger(__name__)

# 同一轨迹上的谱按时间相关，R₁ 误差改用批均值
R1_BATCHES = 20

TABLE_COLUMNS = {
    "r1": ["epsilon", "value", "stderr", "reference"],
    "cluster-hard": ["omega", "value", "stderr", "reference"],
    "cluster-bulk": ["omega", "value", "stderr", "reference"],
    "cluster-soft": ["omega", "value", "stderr", "reference"],
    "spacing": ["s", "value", "stderr", "reference"],
}


def split_count(count: int, trajectories: int) -> List[int]:
    """把 count 个谱尽量均匀地分给各轨迹，靠前的轨迹多分一个"""
    base, extra = divmod(count, trajectories)
    return [base + (1 if i < extra else 0) for i in range(trajectories)]


def protocol_name(cfg: RunConfig) -> str:
    if cfg.trajectories == 1:
        return "single-trajectory"
    if cfg.trajectories == cfg.count:
        return "many-initial-conditions"
    return "mixed"


def initial_center(cfg: RunConfig, seed: int) -> Tuple[float, float, float, float]:
    """初态中心 (x1, p1, x2, p2)；random 时在相空间环面上均匀抽取"""
    if cfg.initial == "fixed":
        return cfg.x0, cfg.p0, cfg.x0, cfg.p0
    rng = np.random.default_rng(seed)
    x = rng.uniform(0.0, 2.0 * math.pi, size=2)
    p = rng.uniform(-math.pi, math.pi, size=2)
    return float(x[0]), float(p[0]), float(x[1]), float(p[1])


def initial_state(
    cfg: RunConfig, center: Tuple[float, float, float, float]
) -> WaveFunction2D:
    x1, p1, x2, p2 = center
    return build_coherent_product(
        CoherentStateSpec(x1, p1, cfg.sigma),
        CoherentStateSpec(x2, p2, cfg.sigma),
        cfg.lattice_config(),
    )


def _system(cfg: RunConfig) -> SystemParams:
    return SystemParams(cfg.k1, cfg.k2, cfg.cpp)


class _Recorder:
    """每步记录熵（以及需要时的前几个 Schmidt 权重）"""

    def __init__(self, state: TrajectoryState, levels: Optional[int]):
        self.state = state
        self.levels = levels

    def observe(self, psi: WaveFunction2D) -> float:
        spectrum = schmidt_decompose(psi)
        entropy = von_neumann_entropy(spectrum)
        weights = None
        if self.levels is not None:
            weights = _leading(spectrum.weights, self.levels)
        record_step(self.state, entropy, weights)
        return entropy

    def __call__(self, step: int, psi: WaveFunction2D) -> None:
        self.observe(psi)


def _leading(weights: np.ndarray, levels: int) -> List[float]:
    padded = np.zeros(levels)
    padded[: min(levels, weights.size)] = weights[:levels]
    return padded.tolist()


def _auto_burn_in(
    cfg: RunConfig,
    psi: WaveFunction2D,
    recorder: _Recorder,
    observer: Optional[_Recorder],
) -> Tuple[WaveFunction2D, int]:
    """演化到熵饱和，再多走 guard_steps 步；总步数不超过 max_burn_in"""
    params = _system(cfg)
    state = recorder.state
    window = cfg.saturation_window
    step = 0
    while step < cfg.max_burn_in:
        psi = evolve(psi, params, 1, order=cfg.order)
        step += 1
        recorder.observe(psi)
        series = state["entropies"]
        if len(series) < window:
            continue
        # 只看最新的窗口：第一次命中即整条序列的饱和下标
        if detect_saturation(series[-window:], window, cfg.saturation_tol) is not None:
            state["saturation_step"] = len(series) - 1
            break
    else:
        logger.warning(
            "轨迹 %d 在 %d 步内未检测到熵饱和", state["index"], cfg.max_burn_in
        )
        return psi, step

    guard = min(cfg.guard_steps, cfg.max_burn_in - step)
    if guard > 0:
        psi = evolve(psi, params, guard, observer=observer, order=cfg.order)
        step += guard
    return psi, step


def run_trajectory(
    cfg: RunConfig, index: int, target: int, record_levels: Optional[int] = None
) -> Tuple[np.ndarray, TrajectoryState]:
    """
    跑一条轨迹：预热后每 stride 步采一个谱

    Args:
        cfg: 运行配置
        index: 轨迹序号，种子为 master_seed + index
        target: 本轨迹要采集的谱个数
        record_levels: 逐步记录的 Schmidt 权重个数；None 时只在自动预热阶段记录熵

    Returns:
        (形状 (target, N) 的 ε 谱, 轨迹状态)
    """
    seed = cfg.master_seed + index
    center = initial_center(cfg, seed)
    state = create_initial_state(index, seed, list(center), target)
    recorder = _Recorder(state, record_levels)
    observer = recorder if record_levels is not None else None
    params = _system(cfg)

    psi = initial_state(cfg, center)
    recorder.observe(psi)

    if cfg.burn_in == "auto":
        psi, burn_in = _auto_burn_in(cfg, psi, recorder, observer)
    else:
        burn_in = cfg.burn_in
        if burn_in > 0:
            psi = evolve(psi, params, burn_in, observer=observer, order=cfg.order)
    state["burn_in"] = burn_in
    logger.debug("轨迹 %d: 预热 %d 步, 饱和于 %s", index, burn_in, state["saturation_step"])

    spectra = np.empty((target, cfg.N))
    for row in range(target):
        psi = evolve(psi, params, cfg.stride, observer=observer, order=cfg.order)
        spectra[row] = scale_spectrum(schmidt_decompose(psi), cfg.N).epsilons
        state["collected"] += 1
    return spectra, state


def _entropy_rows(state: TrajectoryState, levels: int) -> np.ndarray:
    steps = np.arange(len(state["entropies"]), dtype=float)
    weights = np.asarray(state["leading_weights"], dtype=float).reshape(-1, levels)
    return np.column_stack([steps, state["entropies"], weights])


def _entropy_header(cfg: RunConfig) -> Dict[str, object]:
    return {
        "analysis": "entropy",
        "N": cfg.N,
        "k1": cfg.k1,
        "k2": cfg.k2,
        "cpp": cfg.cpp,
        "initial": cfg.initial,
        "seed": cfg.master_seed,
        "order": cfg.order,
        "S_max": math.log(cfg.N),
    }


def _entropy_columns(levels: int) -> List[str]:
    return ["step", "S"] + [f"lambda{i + 1}^2" for i in range(levels)]


def run_simulate(cfg: RunConfig) -> SpectraEnsemble:
    """
    运行动力学并采集纠缠谱系综

    写出谱文件（cfg.resolve("ensemble")）和第一条轨迹的熵时间序列
    （cfg.resolve("entropy")）。

    Args:
        cfg: 运行配置

    Returns:
        SpectraEnsemble: 采集到的系综
    """
    lattice = cfg.lattice_config()
    targets = split_count(cfg.count, cfg.trajectories)
    logger.info(
        "模拟: N=%d, k1=%g, k2=%g, cpp=%g, %d 条轨迹共 %d 个谱",
        cfg.N,
        cfg.k1,
        cfg.k2,
        cfg.cpp,
        cfg.trajectories,
        cfg.count,
    )
    results = Parallel(n_jobs=cfg.n_jobs)(
        delayed(run_trajectory)(cfg, i, target, cfg.levels if i == 0 else None)
        for i, target in enumerate(targets)
    )
    spectra = np.concatenate([r[0] for r in results], axis=0)
    for _, state in results:
        logger.info(
            "轨迹 %d: 预热 %d 步, 采集 %d 个谱",
            state["index"],
            state["burn_in"],
            state["collected"],
        )

    metadata = EnsembleMetadata(
        N=cfg.N,
        source="simulation",
        k1=cfg.k1,
        k2=cfg.k2,
        cpp=cfg.cpp,
        sigma=cfg.sigma if cfg.sigma is not None else math.sqrt(lattice.hbar / 2.0),
        burn_in=cfg.burn_in,
        stride=cfg.stride,
        seed=cfg.master_seed,
        count=cfg.count,
        protocol=protocol_name(cfg),
        trajectories=cfg.trajectories,
        initial=cfg.initial,
        order=cfg.order,
    )
    ensemble = SpectraEnsemble(spectra, metadata)
    write_ensemble(ensemble, cfg.resolve("ensemble"))

    first = results[0][1]
    write_table(
        cfg.resolve("entropy"),
        _entropy_header(cfg),
        _entropy_columns(cfg.levels),
        _entropy_rows(first, cfg.levels),
    )
    return ensemble


def run_rmt_sample(
    N: int,
    count: int,
    fixed_trace: bool,
    seed: int,
    output: str | Path,
    n_jobs: int = 1,
) -> SpectraEnsemble:
    """
    抽取 LUE 系综并写出谱文件

    Returns:
        SpectraEnsemble: source="lue-sampler" 的系综
    """
    cfg = SamplerConfig(N=N, seed=seed, fixed_trace=fixed_trace)
    spectra = sample_lue_ensemble(cfg, count, n_jobs=n_jobs)
    metadata = EnsembleMetadata(
        N=N, source="lue-sampler", seed=seed, count=count, fixed_trace=fixed_trace
    )
    ensemble = SpectraEnsemble(spectra, metadata)
    write_ensemble(ensemble, output)
    return ensemble


def _default_omega_edges(N: int) -> np.ndarray:
    return np.linspace(0.0, min(4.0, float(N)), 41)


def _r1_batches(ensemble: SpectraEnsemble) -> Optional[int]:
    """独立初态（或 LUE 采样）的谱用 Poisson 误差，其余按批均值"""
    protocol = ensemble.metadata.protocol
    if protocol in (None, "many-initial-conditions"):
        return None
    if len(ensemble) < 2 * R1_BATCHES:
        return None
    return R1_BATCHES


def run_analyze(
    ensemble_path: str | Path,
    analysis: str,
    output: str | Path,
    N: Optional[int] = None,
    edges: Optional[np.ndarray] = None,
    windows: Optional[ClusterWindows] = None,
) -> Tuple[Path, Dict[str, float]]:
    """
    对谱文件做统计分析并写出结果表

    列为：横坐标、经验值、标准误差、解析参考（σ_N、T̄₂ 或 Wigner 猜想）。

    Args:
        ensemble_path: 谱文件
        analysis: r1 | cluster-hard | cluster-bulk | cluster-soft | spacing
        output: 结果表路径
        N: 期望的维数，与文件不符时报错
        edges: 横坐标分箱，默认按分析类型选取
        windows: T̄₂ 的条件窗口

    Returns:
        (结果表路径, 汇总数值)

    Raises:
        DimensionMismatchError: 文件的 N 与期望不符
    """
    if analysis not in TABLE_COLUMNS:
        raise DomainError(f"未知分析类型: {analysis}")
    ensemble = read_ensemble(ensemble_path)
    if N is not None and N != ensemble.N:
        raise DimensionMismatchError(f"谱文件 N={ensemble.N} 与请求的 N={N} 不一致")
    K = LaguerreKernel(ensemble.N)
    header: Dict[str, object] = {
        "analysis": analysis,
        "N": ensemble.N,
        "source": ensemble.metadata.source,
    }
    summary: Dict[str, float] = {"samples": float(len(ensemble))}

    if analysis == "r1":
        if edges is None:
            edges = default_epsilon_edges(ensemble)
        batches = _r1_batches(ensemble)
        estimate = estimate_R1(ensemble, edges, batches)
        x = estimate.centers[0]
        reference = one_level_density(K, x)
        header.update(
            unfolding="none",
            window="all",
            errors="poisson" if batches is None else f"batch-means/{batches}",
            samples=len(ensemble),
            overflow=estimate.overflow,
        )
        data = np.column_stack([x, estimate.values, estimate.errors, reference])

    elif analysis.startswith("cluster-"):
        regime = analysis.split("-", 1)[1]
        windows = windows or ClusterWindows()
        unfolding = build_unfolding(K)
        omega_edges = edges if edges is not None else _default_omega_edges(ensemble.N)
        estimate = estimate_renormalized_cluster(
            ensemble, unfolding, regime, omega_edges, windows
        )
        x = estimate.centers[0]
        reference = cluster_reference(K, unfolding, regime, x, windows)
        if regime == "hard":
            window = (0.0, windows.hard_window)
        elif regime == "soft":
            window = (ensemble.N - windows.soft_window, float(ensemble.N))
        else:
            window = windows.bulk_range(ensemble.N)
        header.update(
            unfolding="analytic",
            window=window,
            samples=len(ensemble),
            overflow=estimate.overflow,
        )
        data = np.column_stack([x, estimate.values, estimate.errors, reference])

    else:
        unfolding = build_unfolding(K)
        histogram = spacing_distribution(ensemble, unfolding, edges=edges)
        x = histogram.centers
        widths = np.diff(histogram.edges)
        in_range = max(int(histogram.counts.sum()), 1)
        errors = np.sqrt(histogram.counts) / (in_range * widths)
        ks = ks_distance(histogram.samples, wigner_surmise_gue_cdf)
        summary.update(
            ks_distance=ks,
            mean_spacing=histogram.mean_spacing,
            raw_mean_spacing=histogram.raw_mean,
        )
        header.update(
            unfolding="analytic",
            window=histogram.window,
            samples=len(ensemble),
            spacings=histogram.sample_count,
            raw_mean_spacing=histogram.raw_mean,
            ks_distance=ks,
            overflow=histogram.overflow,
        )
        data = np.column_stack([x, histogram.density, errors, wigner_surmise_gue(x)])

    path = write_table(output, header, TABLE_COLUMNS[analysis], data)
    logger.info("写出 %s 结果表 %s", analysis, path)
    return path, summary


def run_entropy(cfg: RunConfig, steps: int, output: str | Path) -> Path:
    """
    单条轨迹的熵与前 cfg.levels 个 Schmidt 权重随步数的变化

    第 0 行是初态；steps = 0 时只有这一行。

    Returns:
        Path: 时间序列文件
    """
    if steps < 0:
        raise DomainError(f"steps 必须 ≥ 0: {steps}")
    center = initial_center(cfg, cfg.master_seed)
    state = create_initial_state(0, cfg.master_seed, list(center), 0)
    recorder = _Recorder(state, cfg.levels)
    psi = initial_state(cfg, center)
    recorder.observe(psi)
    if steps > 0:
        evolve(psi, _system(cfg), steps, observer=recorder, order=cfg.order)
    logger.info(
        "熵时间序列: %d 步, 末态 S=%.4f (ln N=%.4f)",
        steps,
        state["entropies"][-1],
        math.log(cfg.N),
    )
    return write_table(
        output,
        _entropy_header(cfg),
        _entropy_columns(cfg.levels),
        _entropy_rows(state, cfg.levels),
    )