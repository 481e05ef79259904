"""命令行子命令，每个动词一个模块，在 main.py 中注册"""
