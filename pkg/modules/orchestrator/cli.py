"""
命令行入口：simulate / rmt-sample / analyze / entropy
"""

import argparse
import logging
import sys
from typing import Any, Callable, Dict, List, Optional

from modules.orchestrator.runner import (
    run_analyze,
    run_entropy,
    run_rmt_sample,
    run_simulate,
)
from modules.sampler.rmt import lue_mean_entropy
from modules.statistics.ensemble import ensemble_mean_entropy
from modules.utils.config import RunConfig, build_config
from modules.utils.errors import ConfigError, EntangleError
from modules.utils.log import setup_logging
from modules.utils.tracking import tracking_run

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CONFIG = 2

# 只在部分子命令上出现的参数
SUBCOMMAND_FIELDS = (
    "burn_in",
    "stride",
    "trajectories",
    "initial",
    "order",
    "levels",
    "steps",
    "analysis",
)


def _burn_in(value: str):
    if value == "auto":
        return value
    try:
        return int(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"burn-in 必须是非负整数或 auto: {value}")


def _common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="YAML 配置文件")
    common.add_argument("--preset", help="presets/ 下的预设（文件名或类别）")
    common.add_argument("--N", type=int, help="每个自由度的格点数")
    common.add_argument("--k1", type=float)
    common.add_argument("--k2", type=float)
    common.add_argument("--cpp", type=float, help="动量-动量耦合常数")
    common.add_argument("--count", type=int, help="谱的个数")
    common.add_argument("--seed", type=int, help="主种子")
    common.add_argument("--out", help="输出文件路径")
    common.add_argument("--n-jobs", type=int, help="并行任务数")
    common.add_argument("--track", action="store_true", help="用 mlflow 记录本次运行")
    common.add_argument("-v", "--verbose", action="store_true", help="输出 DEBUG 日志")
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common_parser()
    parser = argparse.ArgumentParser(
        prog="entangle-spectra",
        description="耦合踢转系统纠缠谱与 Laguerre 幺正系综的比较",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    simulate = sub.add_parser("simulate", parents=[common], help="动力学采集纠缠谱")
    simulate.add_argument("--burn-in", type=_burn_in, help="预热步数或 auto")
    simulate.add_argument("--stride", type=int, help="采样间隔步数")
    simulate.add_argument("--trajectories", type=int, help="轨迹条数")
    simulate.add_argument("--initial", choices=["fixed", "random"])
    simulate.add_argument("--order", choices=["kick-first", "kinetic-first"])
    simulate.add_argument("--entropy-out", help="第一条轨迹的熵时间序列文件")
    simulate.add_argument("--levels", type=int, help="熵文件中输出的 Schmidt 权重个数")

    rmt = sub.add_parser("rmt-sample", parents=[common], help="抽取 LUE 谱")
    rmt.add_argument("--fixed-trace", action="store_true", help="缩放到 Σε = N²")

    analyze = sub.add_parser("analyze", parents=[common], help="统计分析谱文件")
    analyze.add_argument("--ensemble", help="谱文件，默认为输出目录下的 ensemble.txt")
    analyze.add_argument(
        "--analysis",
        choices=["r1", "cluster-hard", "cluster-bulk", "cluster-soft", "spacing"],
    )

    entropy = sub.add_parser("entropy", parents=[common], help="熵随时间的演化")
    entropy.add_argument("--steps", type=int, help="演化步数")
    entropy.add_argument("--levels", type=int, help="输出的 Schmidt 权重个数")
    entropy.add_argument("--order", choices=["kick-first", "kinetic-first"])
    entropy.add_argument("--initial", choices=["fixed", "random"])
    return parser


def _overrides(args: argparse.Namespace) -> Dict[str, Any]:
    """把命令行参数映射到 RunConfig 字段，未给出的参数不覆盖"""
    overrides = {
        "N": args.N,
        "k1": args.k1,
        "k2": args.k2,
        "cpp": args.cpp,
        "count": args.count,
        "master_seed": args.seed,
        "n_jobs": args.n_jobs,
        "tracking": True if args.track else None,
    }
    for name in SUBCOMMAND_FIELDS:
        overrides[name] = getattr(args, name, None)
    if getattr(args, "fixed_trace", False):
        overrides["fixed_trace"] = True

    out_field = {
        "simulate": "ensemble_path",
        "rmt-sample": "ensemble_path",
        "analyze": "table_path",
        "entropy": "entropy_path",
    }[args.command]
    overrides[out_field] = args.out
    if getattr(args, "entropy_out", None):
        overrides["entropy_path"] = args.entropy_out
    return overrides


def _simulate(cfg: RunConfig, args: argparse.Namespace, tracker) -> None:
    cfg.lattice_config()
    ensemble = run_simulate(cfg)
    tracker.log_metrics(
        {"mean_entropy": ensemble_mean_entropy(ensemble), "spectra": len(ensemble)}
    )
    tracker.log_artifact(cfg.resolve("ensemble"))
    tracker.log_artifact(cfg.resolve("entropy"))


def _rmt_sample(cfg: RunConfig, args: argparse.Namespace, tracker) -> None:
    output = cfg.resolve("ensemble")
    ensemble = run_rmt_sample(
        cfg.N, cfg.count, cfg.fixed_trace, cfg.master_seed, output, cfg.n_jobs
    )
    if cfg.fixed_trace:
        mean = lue_mean_entropy(cfg.N, cfg.count, spectra=ensemble.spectra)
        tracker.log_metrics({"mean_entropy": mean})
    tracker.log_artifact(output)


def _analyze(cfg: RunConfig, args: argparse.Namespace, tracker) -> None:
    source = args.ensemble or cfg.resolve("ensemble")
    path, summary = run_analyze(source, cfg.analysis, cfg.resolve("table"), N=args.N)
    tracker.log_metrics(summary)
    tracker.log_artifact(path)


def _entropy(cfg: RunConfig, args: argparse.Namespace, tracker) -> None:
    cfg.lattice_config()
    path = run_entropy(cfg, cfg.steps, cfg.resolve("entropy"))
    tracker.log_artifact(path)


COMMANDS: Dict[str, Callable[[RunConfig, argparse.Namespace, Any], None]] = {
    "simulate": _simulate,
    "rmt-sample": _rmt_sample,
    "analyze": _analyze,
    "entropy": _entropy,
}


def _one_line(error: BaseException) -> str:
    text = str(error).strip().splitlines()
    return text[0] if text else type(error).__name__


def main(argv: Optional[List[str]] = None) -> int:
    """
    运行一个子命令

    Returns:
        int: 0 成功；2 配置错误；1 其他错误
    """
    args = build_parser().parse_args(argv)
    setup_logging(args.verbose)
    try:
        cfg = build_config(args.preset, args.config, _overrides(args))
        with tracking_run(args.command, cfg.tracking_params(), cfg.tracking) as tracker:
            COMMANDS[args.command](cfg, args, tracker)
    except ConfigError as e:
        print(f"配置错误: {_one_line(e)}", file=sys.stderr)
        return EXIT_CONFIG
    except (EntangleError, OSError) as e:
        print(f"错误: {_one_line(e)}", file=sys.stderr)
        return EXIT_FAILURE
    return EXIT_OK
