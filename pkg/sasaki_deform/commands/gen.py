"""gen: 生成内置例子的网格文件"""

import logging

import click

from sasaki_deform.commands.common import build_builtin, emit, handle_errors
from sasaki_deform.mesh.io import save_mesh
from sasaki_deform.schemas.run import RunConfig

logger = logging.getLogger(__name__)


@click.command("gen")
@click.option(
    "--builtin",
    type=click.Choice(["clifford-circle", "clifford-torus"]),
    required=True,
    help="内置例子",
)
@click.option("--res", "resolution", default=None, help="分辨率，如 256 或 64x64")
@click.option("-o", "--output", required=True, type=click.Path(dir_okay=False), help="输出 JSON")
@handle_errors
def gen(builtin: str, resolution: str, output: str) -> None:
    """Write a builtin Clifford circle or torus mesh to JSON."""
    config = RunConfig(command="gen", builtin=builtin, resolution=resolution, output=output)
    mesh, embedding = build_builtin(builtin, config.resolution)
    path = save_mesh(mesh, embedding, output)
    logger.info("generated %s with %d vertices", builtin, mesh.n_vertices)
    emit({"mesh": str(path), "dim": mesh.dim, "vertices": mesh.n_vertices}, None)
