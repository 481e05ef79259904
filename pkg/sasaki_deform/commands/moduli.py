"""moduli: 线性化算子的核维数与预测刻画比较"""

import logging
from typing import Optional

import click

from sasaki_deform.commands.common import (
    emit,
    finish,
    handle_errors,
    kind_name,
    load_source,
    mesh_options,
)
from sasaki_deform.core.config import settings
from sasaki_deform.dec.operators import assemble_operators
from sasaki_deform.deform.moduli import moduli_tangent
from sasaki_deform.deform.pullback import KINDS
from sasaki_deform.mesh.metric import induced_metric
from sasaki_deform.schemas.run import RunConfig

logger = logging.getLogger(__name__)

KIND_CHOICES = [k.replace("_", "-") for k in KINDS]


@click.command("moduli")
@mesh_options
@click.option("--kind", type=click.Choice(KIND_CHOICES), required=True)
@click.option("--kappa", type=float, default=None, help="缺省 n+1")
@click.option("--window", type=float, default=settings.CLUSTER_WINDOW, show_default=True)
@click.option("-o", "--output", type=click.Path(dir_okay=False), default=None)
@handle_errors
def moduli(
    mesh_path: Optional[str],
    builtin: Optional[str],
    resolution: Optional[str],
    kind: str,
    kappa: Optional[float],
    window: float,
    output: Optional[str],
) -> None:
    """Compute Ker D₁ for an operator kind; exit 1 unless it matches the prediction."""
    config = RunConfig(
        command="moduli",
        mesh_path=mesh_path,
        builtin=builtin,
        resolution=resolution,
        kind=kind_name(kind),
        kappa=kappa,
        tolerances={"window": window},
        output=output,
    )
    mesh, embedding = load_source(config)
    ops = assemble_operators(mesh, induced_metric(mesh, embedding))
    value = float(mesh.dim + 1) if config.kappa is None else config.kappa
    result = moduli_tangent(config.kind or "", ops, value, window)
    emit(result.report, output)
    finish(result.report.match)
