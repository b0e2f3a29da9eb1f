# 踢转动力学模块
