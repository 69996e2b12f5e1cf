# 全局吸引子 SOS 外逼近工具包
# 包根目录即工具包本身，支持 python -m 运行与相对导入
