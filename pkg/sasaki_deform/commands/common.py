"""
命令层的公共部分：网格来源、结构参数、输出与错误映射

<rationale>
库代码只抛 SasakiDeformError，不退出进程；这里是唯一把异常映射为退出码的地方：
- 0: 通过
- 1: 数值/不变量失败（含 exit_code = 1 的领域异常）
- 2: 用法或解析错误（ParameterError、MeshParseError、配置校验失败）
错误以 {"error": {"type", "message", "detail"}} 写到输出位置。
</rationale>
"""

import functools
import json
import logging
from pathlib import Path
from typing import Any, Callable, Optional, Tuple, TypeVar, Union

import click
from pydantic import BaseModel, ValidationError

from sasaki_deform.ambient.structure import AmbientStructure
from sasaki_deform.core.errors import ParameterError, SasakiDeformError
from sasaki_deform.mesh.builders import build_clifford_circle, build_clifford_torus
from sasaki_deform.mesh.complex import Embedding, SimplicialComplex
from sasaki_deform.mesh.io import load_mesh
from sasaki_deform.schemas.run import RunConfig

logger = logging.getLogger(__name__)

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_USAGE = 2

DEFAULT_RESOLUTION = {"clifford-circle": "256", "clifford-torus": "64x64"}

F = TypeVar("F", bound=Callable[..., Any])


# ========== 选项 ==========

def mesh_options(func: F) -> F:
    """--mesh / --builtin / --res"""
    func = click.option("--res", "resolution", default=None, help="分辨率，如 256 或 64x64")(func)
    func = click.option(
        "--builtin",
        type=click.Choice(["clifford-circle", "clifford-torus"]),
        default=None,
        help="内置例子",
    )(func)
    func = click.option(
        "--mesh", "mesh_path", type=click.Path(dir_okay=False), default=None, help="网格 JSON"
    )(func)
    return func


class ThetaType(click.ParamType):
    """'auto' 或实数"""

    name = "theta"

    def convert(self, value: Any, param: Any, ctx: Any) -> Union[float, str]:
        if isinstance(value, float) or value == "auto":
            return value
        try:
            return float(value)
        except ValueError:
            self.fail(f"{value!r} 既不是 'auto' 也不是实数", param, ctx)


THETA = ThetaType()


def kind_name(value: str) -> str:
    """命令行的 special-legendrian → special_legendrian"""
    return value.replace("-", "_")


# ========== 网格与结构 ==========

def build_builtin(name: str, resolution: Optional[str]) -> Tuple[SimplicialComplex, Embedding]:
    config = RunConfig(
        command="gen", builtin=name, resolution=resolution or DEFAULT_RESOLUTION[name]
    )
    sizes = config.resolution_tuple
    if name == "clifford-circle":
        if len(sizes) != 1:
            raise ParameterError(f"圆的分辨率必须是单个整数: {resolution}", resolution=resolution)
        return build_clifford_circle(sizes[0])
    if len(sizes) == 1:
        sizes = (sizes[0], sizes[0])
    return build_clifford_torus(sizes[0], sizes[1])


def load_source(config: RunConfig) -> Tuple[SimplicialComplex, Embedding]:
    if config.mesh_path is not None:
        return load_mesh(config.mesh_path)
    if config.builtin is not None:
        return build_builtin(config.builtin, config.resolution)
    raise ParameterError("需要 --mesh 或 --builtin 之一")


def structure_for(dim: int, kappa: Optional[float], theta: float = 0.0) -> AmbientStructure:
    """κ 缺省为 n+1（Sasaki–Einstein），否则取 D-homothety 后的加权结构"""
    if kappa is None:
        return AmbientStructure.standard(dim, theta)
    return AmbientStructure.weighted(dim, kappa, theta)


# ========== 输出 ==========

def _plain(value: Any) -> Any:
    """numpy 标量 → Python 标量"""
    return value.item() if hasattr(value, "item") else str(value)


def dump(payload: Union[BaseModel, dict]) -> str:
    if isinstance(payload, BaseModel):
        return payload.model_dump_json(indent=2)
    return json.dumps(payload, indent=2, ensure_ascii=False, default=_plain)


def emit(payload: Union[BaseModel, dict], output: Optional[str]) -> None:
    text = dump(payload)
    if output:
        target = Path(output)
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_text(text + "\n", encoding="utf-8")
        logger.info("wrote %s", target)
    else:
        click.echo(text)


def _error_exit(payload: dict, code: int, output: Optional[str]) -> None:
    try:
        emit({"error": payload}, output)
    except OSError:
        click.echo(dump({"error": payload}))
    raise click.exceptions.Exit(code)


def handle_errors(func: F) -> F:
    """把领域异常与配置校验错误转成 JSON error 字段和退出码"""

    @functools.wraps(func)
    def wrapper(*args: Any, **kwargs: Any) -> Any:
        output = kwargs.get("output")
        try:
            return func(*args, **kwargs)
        except SasakiDeformError as exc:
            logger.error("%s: %s", type(exc).__name__, exc.message)
            _error_exit(exc.to_dict(), exc.exit_code, output)
        except ValidationError as exc:
            detail = {"errors": json.loads(exc.json(include_url=False))}
            _error_exit(
                {"type": "ParameterError", "message": "配置校验失败", "detail": detail},
                EXIT_USAGE,
                output,
            )
        except OSError as exc:
            click.echo(dump({"error": {"type": "OSError", "message": str(exc), "detail": {}}}))
            raise click.exceptions.Exit(EXIT_FAIL) from exc

    return wrapper  # type: ignore[return-value]


def finish(passed: bool) -> None:
    if not passed:
        raise click.exceptions.Exit(EXIT_FAIL)
