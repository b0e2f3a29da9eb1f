# 运行编排模块
