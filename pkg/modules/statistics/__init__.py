# 谱统计模块
