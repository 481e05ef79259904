"""flow: 沿调和方向或 Reeb 方向的延拓"""

import logging
from typing import Optional

import click

from sasaki_deform.commands.common import (
    emit,
    finish,
    handle_errors,
    load_source,
    mesh_options,
    structure_for,
)
from sasaki_deform.deform.continuation import continuation
from sasaki_deform.schemas.run import RunConfig

logger = logging.getLogger(__name__)


@click.command("flow")
@mesh_options
@click.option("--kappa", type=float, default=None, help="结构权重 κ，缺省 n+1")
@click.option("--direction", type=click.Choice(["harmonic", "reeb"]), default="harmonic")
@click.option("--index", type=click.IntRange(min=0), default=0, help="调和方向编号")
@click.option("--step", type=float, default=0.01, show_default=True)
@click.option("--steps", type=click.IntRange(min=0), default=10, show_default=True)
@click.option("--tol", type=float, default=None, help="Newton 残差目标")
@click.option("-o", "--output-dir", required=True, type=click.Path(file_okay=False))
@handle_errors
def flow(
    mesh_path: Optional[str],
    builtin: Optional[str],
    resolution: Optional[str],
    kappa: Optional[float],
    direction: str,
    index: int,
    step: float,
    steps: int,
    tol: Optional[float],
    output_dir: str,
) -> None:
    """March along a moduli direction with Newton–Green correction after each step."""
    config = RunConfig(
        command="flow",
        mesh_path=mesh_path,
        builtin=builtin,
        resolution=resolution,
        kappa=kappa,
        output=output_dir,
    )
    mesh, embedding = load_source(config)
    structure = structure_for(mesh.dim, config.kappa)
    path = continuation(
        mesh,
        embedding,
        structure,
        direction=direction,  # type: ignore[arg-type]
        index=index,
        step=step,
        steps=steps,
        tol=tol,
    )
    target = path.save(output_dir)
    logger.info("wrote %d path steps to %s", len(path.embeddings), target)
    emit(path.log, None)
    finish(not path.log.truncated)
