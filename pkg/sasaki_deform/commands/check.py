"""check: 分类（Legendre / special / θ-special / minimal），可选加密收敛表"""

import logging
from typing import Optional, Union

import click

from sasaki_deform.commands.common import (
    THETA,
    emit,
    finish,
    handle_errors,
    load_source,
    mesh_options,
    structure_for,
)
from sasaki_deform.deform.classify import classify
from sasaki_deform.deform.linearization import convergence_table
from sasaki_deform.mesh.refine import refine
from sasaki_deform.schemas.reports import CheckReport
from sasaki_deform.schemas.run import RunConfig

logger = logging.getLogger(__name__)


@click.command("check")
@mesh_options
@click.option("--kappa", type=float, default=None, help="结构权重 κ，缺省 n+1")
@click.option("--theta", type=THETA, default="auto", show_default=True, help="'auto' 或相位值")
@click.option("--refine", "levels", type=click.IntRange(min=0), default=0, help="加密次数")
@click.option("-o", "--output", type=click.Path(dir_okay=False), default=None)
@handle_errors
def check(
    mesh_path: Optional[str],
    builtin: Optional[str],
    resolution: Optional[str],
    kappa: Optional[float],
    theta: Union[float, str],
    levels: int,
    output: Optional[str],
) -> None:
    """Classify a mesh; exit 1 unless it is Legendrian and θ-special."""
    config = RunConfig(
        command="check",
        mesh_path=mesh_path,
        builtin=builtin,
        resolution=resolution,
        kappa=kappa,
        theta=theta,
        output=output,
    )
    mesh, embedding = load_source(config)
    structure = structure_for(mesh.dim, config.kappa)
    fixed = None if config.theta == "auto" else float(config.theta)  # type: ignore[arg-type]

    records = []
    for level in range(levels + 1):
        if level > 0:
            mesh, embedding = refine(mesh, embedding)
        records.append(classify(mesh, embedding, structure, theta=fixed, rotate_special=True))
        logger.info("check level %d: h=%.4g", level, records[-1].mesh_size)

    sizes = [r.mesh_size for r in records]
    tables = []
    if levels > 0:
        tables = [
            convergence_table([r.legendrian.residual for r in records], sizes, "legendrian"),
            convergence_table([r.theta_special.residual for r in records], sizes, "theta_special"),
        ]
    final = records[-1]
    report = CheckReport(classification=final, refinements=records[:-1], convergence=tables)
    emit(report, output)
    finish(final.legendrian.value and final.theta_special.value)
