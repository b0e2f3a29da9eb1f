"""
制表符分隔的结果表

格式：若干 "# key=value" 头部行，一行 "# 列名\t列名..."，然后是数据行。
"""

from pathlib import Path
from typing import Any, Dict, List, Mapping, Sequence, Tuple

import numpy as np


def _format_header_value(value: Any) -> str:
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (tuple, list)):
        return ",".join(_format_header_value(v) for v in value)
    if isinstance(value, bool):
        return "true" if value else "false"
    return "none" if value is None else str(value)


def write_table(
    path: str | Path,
    header: Mapping[str, Any],
    columns: Sequence[str],
    data: np.ndarray,
    fmt: str = "%.12e",
) -> Path:
    """写出结果表，同样输入得到逐字节相同的文件"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    data = np.asarray(data, dtype=float).reshape(-1, len(columns))
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for key, value in header.items():
            f.write(f"# {key}={_format_header_value(value)}\n")
        f.write("# " + "\t".join(columns) + "\n")
        if data.size:
            np.savetxt(f, data, fmt=fmt, delimiter="\t")
    return path


def read_table(path: str | Path) -> Tuple[Dict[str, str], List[str], np.ndarray]:
    """读回结果表：(头部, 列名, 数据)"""
    header: Dict[str, str] = {}
    columns: List[str] = []
    rows = []
    with open(path, "r", encoding="utf-8") as f:
        for line in f:
            line = line.rstrip("\n")
            if line.startswith("#"):
                body = line[1:].strip()
                key, sep, value = body.partition("=")
                if sep and "\t" not in body:
                    header[key] = value
                else:
                    columns = body.split("\t")
            elif line.strip():
                rows.append([float(v) for v in line.split("\t")])
    return header, columns, np.array(rows, dtype=float).reshape(len(rows), len(columns))
