# Laguerre 系综解析模块
