# 纠缠谱普适性工具包 - 模块包
