"""核心配置、异常与日志"""
