"""
命令行入口

<rationale>
- 顶层 group 只负责日志与线程数，子命令各自构造 RunConfig 并调用库函数
- BLAS/OpenMP 读取线程环境变量发生在 numpy/scipy 首次导入时，
  所以子命令模块按名字延迟导入，--threads 作为 eager 选项在解析阶段最先生效
</rationale>

Related:
    - commands/common.py: 错误到退出码的映射
    - core/config.py: SASAKI_DEFORM_* 环境变量
"""

from importlib import import_module
from typing import Any, Dict, List, Optional

import click

from sasaki_deform import __version__
from sasaki_deform.core.config import apply_thread_cap, settings
from sasaki_deform.core.logging import configure_logging

COMMANDS: Dict[str, str] = {
    "gen": "sasaki_deform.commands.gen",
    "check": "sasaki_deform.commands.check",
    "identity": "sasaki_deform.commands.identity",
    "moduli": "sasaki_deform.commands.moduli",
    "flow": "sasaki_deform.commands.flow",
    "spectrum": "sasaki_deform.commands.spectrum",
}


class LazyGroup(click.Group):
    """子命令在第一次被解析时才导入"""

    def __init__(self, *args: Any, lazy_commands: Optional[Dict[str, str]] = None, **kwargs: Any):
        super().__init__(*args, **kwargs)
        self.lazy_commands = dict(lazy_commands or {})

    def list_commands(self, ctx: click.Context) -> List[str]:
        return [*super().list_commands(ctx), *self.lazy_commands]

    def get_command(self, ctx: click.Context, cmd_name: str) -> Optional[click.Command]:
        if cmd_name in self.lazy_commands:
            return getattr(import_module(self.lazy_commands[cmd_name]), cmd_name)
        return super().get_command(ctx, cmd_name)


def _cap_threads(ctx: click.Context, param: click.Parameter, value: Optional[int]) -> Optional[int]:
    apply_thread_cap(settings.THREADS if value is None else value)
    return value


@click.group(cls=LazyGroup, lazy_commands=COMMANDS)
@click.version_option(__version__, prog_name="sasaki-deform")
@click.option(
    "--log-level",
    type=click.Choice(["DEBUG", "INFO", "WARNING", "ERROR"], case_sensitive=False),
    default=None,
    help="缺省取 SASAKI_DEFORM_LOG_LEVEL",
)
@click.option("--log-format", type=click.Choice(["text", "json"]), default=None)
@click.option(
    "--threads",
    type=click.IntRange(min=0),
    default=None,
    is_eager=True,
    expose_value=False,
    callback=_cap_threads,
    help="BLAS 线程上限，缺省取 SASAKI_DEFORM_THREADS",
)
def cli(log_level: Optional[str], log_format: Optional[str]) -> None:
    """Special Legendrian deformation experiments on Sasaki spheres."""
    configure_logging(log_level, log_format)


if __name__ == "__main__":
    cli()
