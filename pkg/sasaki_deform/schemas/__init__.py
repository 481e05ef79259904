"""报告与文件格式的 Pydantic 模型"""
