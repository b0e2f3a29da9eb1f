# 预设管理模块
