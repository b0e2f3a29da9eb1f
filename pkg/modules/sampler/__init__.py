# 随机矩阵采样模块
