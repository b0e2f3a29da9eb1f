"""
参数预设管理器模块
"""

import glob
import os
from functools import lru_cache
from typing import Any, Dict, List, Optional

import yaml

from modules.utils.errors import ConfigError


class PresetManager:
    """预设管理器类"""

    def __init__(self, presets_path: str):
        """
        初始化预设管理器

        Args:
            presets_path: presets 文件夹路径
        """
        self.presets_path = presets_path
        self._preset_cache: Dict[str, Dict[str, Any]] = {}

    def _read(self, file_path: str) -> Dict[str, Any]:
        try:
            with open(file_path, "r", encoding="utf-8") as f:
                data = yaml.safe_load(f) or {}
        except (OSError, yaml.YAMLError) as e:
            raise ConfigError(f"无法读取预设文件 {file_path}: {e}") from e
        if not isinstance(data, dict):
            raise ConfigError(f"预设文件 {file_path} 必须是映射")
        return data

    def load_yaml_metadata(self, file_path: str) -> Dict[str, Any]:
        """加载 YAML 文件的 metadata"""
        return self._read(file_path).get("metadata", {})

    def get_all_preset_files(self) -> List[Dict[str, Any]]:
        """获取所有预设文件信息"""
        preset_files = []

        if not os.path.exists(self.presets_path):
            return preset_files

        for file_path in sorted(glob.glob(os.path.join(self.presets_path, "*.yaml"))):
            metadata = self.load_yaml_metadata(file_path)
            preset_files.append(
                {
                    "filename": os.path.basename(file_path),
                    "filepath": file_path,
                    "metadata": metadata,
                    "category": metadata.get("category", "unknown"),
                    "version": metadata.get("version", "1.0"),
                    "description": metadata.get("description", ""),
                }
            )

        return preset_files

    def get_preset_by_category(self, category: str) -> Optional[str]:
        """根据类别获取预设文件名"""
        for pf in self.get_all_preset_files():
            if pf["category"] == category:
                return pf["filename"]
        return None

    def load_preset(self, name: str) -> Dict[str, Any]:
        """
        加载预设的 config 段

        Args:
            name: 文件名（可省略 .yaml）或 metadata.category

        Returns:
            Dict[str, Any]: 参数映射

        Raises:
            ConfigError: 找不到预设
        """
        if name in self._preset_cache:
            return dict(self._preset_cache[name])

        filename = name if name.endswith(".yaml") else f"{name}.yaml"
        file_path = os.path.join(self.presets_path, filename)
        if not os.path.exists(file_path):
            by_category = self.get_preset_by_category(name)
            if by_category is None:
                available = ", ".join(pf["category"] for pf in self.get_all_preset_files())
                raise ConfigError(f"未知预设: {name}（可用: {available}）")
            file_path = os.path.join(self.presets_path, by_category)

        config = self._read(file_path).get("config") or {}
        if not isinstance(config, dict):
            raise ConfigError(f"预设 {name} 的 config 段必须是映射")
        self._preset_cache[name] = config
        return dict(config)

    def clear_cache(self):
        """清除缓存"""
        self._preset_cache.clear()


@lru_cache(maxsize=None)
def get_preset_manager(presets_path: Optional[str] = None) -> PresetManager:
    """获取预设管理器实例"""
    if presets_path is None:
        # 默认路径
        current_dir = os.path.dirname(os.path.abspath(__file__))
        presets_path = os.path.join(current_dir, "..", "..", "presets")
    return PresetManager(os.path.normpath(presets_path))
