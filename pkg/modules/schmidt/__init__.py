# Schmidt 分解模块
