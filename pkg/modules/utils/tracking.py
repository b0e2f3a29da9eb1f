"""
mlflow 运行记录模块

只有 RunConfig.tracking 为真或设置了 MLFLOW_TRACKING_URI 时才启用；
未启用时所有调用都是空操作。记录不影响任何输出文件的内容。
"""

import logging
import os
from contextlib import contextmanager
from pathlib import Path
from typing import Any, Dict, Iterator, Mapping

logger = logging.getLogger(__name__)


def tracking_enabled(requested: bool = False) -> bool:
    return requested or bool(os.getenv("MLFLOW_TRACKING_URI"))


class RunTracker:
    """对 mlflow 的薄封装"""

    def __init__(self, client=None):
        self._mlflow = client

    @property
    def active(self) -> bool:
        return self._mlflow is not None

    def log_metrics(self, metrics: Mapping[str, float]) -> None:
        if self.active:
            self._mlflow.log_metrics({k: float(v) for k, v in metrics.items()})

    def log_artifact(self, path: str | Path) -> None:
        if self.active and Path(path).exists():
            self._mlflow.log_artifact(str(path))


@contextmanager
def tracking_run(
    name: str, params: Dict[str, Any], requested: bool = False
) -> Iterator[RunTracker]:
    """
    打开一个 mlflow run

    Args:
        name: run 名称（子命令名）
        params: 记录为参数的配置
        requested: 配置中是否要求记录

    Yields:
        RunTracker: 未启用时为空操作对象
    """
    if not tracking_enabled(requested):
        yield RunTracker()
        return

    import mlflow

    uri = os.getenv("MLFLOW_TRACKING_URI")
    if uri:
        mlflow.set_tracking_uri(uri)
    with mlflow.start_run(run_name=name):
        mlflow.log_params({k: str(v) for k, v in params.items()})
        logger.info("mlflow 记录已开启: %s", name)
        yield RunTracker(mlflow)
