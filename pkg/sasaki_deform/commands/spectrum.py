"""spectrum: 导出 (Δ_k, M_k) 的低端谱为 CSV"""

import csv
import io
import logging
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import click

from sasaki_deform.commands.common import handle_errors, load_source, mesh_options
from sasaki_deform.core.config import settings
from sasaki_deform.dec.operators import assemble_operators
from sasaki_deform.dec.spectra import spectrum_near
from sasaki_deform.mesh.metric import induced_metric
from sasaki_deform.schemas.run import RunConfig

logger = logging.getLogger(__name__)

COLUMNS = ("k", "lambda", "multiplicity_cluster_id")


def cluster_ids(values: Sequence[float], window: float) -> List[int]:
    """相邻特征值差 ≤ δ·max(λ, 1) 的归为同一簇"""
    ids: List[int] = []
    for index, value in enumerate(values):
        if index == 0:
            ids.append(0)
        elif value - values[index - 1] <= window * max(value, 1.0):
            ids.append(ids[-1])
        else:
            ids.append(ids[-1] + 1)
    return ids


def spectrum_rows(values: Sequence[float], window: float) -> List[Tuple[int, float, int]]:
    ordered = sorted(float(v) for v in values)
    return [(k, v, c) for k, (v, c) in enumerate(zip(ordered, cluster_ids(ordered, window)))]


@click.command("spectrum")
@mesh_options
@click.option("--degree", type=click.IntRange(0, 2), default=0, show_default=True)
@click.option("--max-lambda", type=click.FloatRange(min=0.0, min_open=True), default=20.0)
@click.option("--window", type=float, default=settings.CLUSTER_WINDOW, show_default=True)
@click.option("-o", "--output", type=click.Path(dir_okay=False), default=None, help="CSV 路径")
@handle_errors
def spectrum(
    mesh_path: Optional[str],
    builtin: Optional[str],
    resolution: Optional[str],
    degree: int,
    max_lambda: float,
    window: float,
    output: Optional[str],
) -> None:
    """Export the Hodge Laplacian eigenvalues in [0, max-lambda] as CSV."""
    config = RunConfig(
        command="spectrum",
        mesh_path=mesh_path,
        builtin=builtin,
        resolution=resolution,
        tolerances={"window": window, "max_lambda": max_lambda},
        output=output,
    )
    mesh, embedding = load_source(config)
    ops = assemble_operators(mesh, induced_metric(mesh, embedding))
    values, _ = spectrum_near(ops, degree, 0.5 * max_lambda, 0.5 * max_lambda)
    rows = spectrum_rows(values, window)

    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(COLUMNS)
    for k, value, cluster in rows:
        writer.writerow([k, f"{value:.12g}", cluster])
    if output:
        Path(output).write_text(buffer.getvalue(), encoding="utf-8")
        logger.info("wrote %d eigenvalues to %s", len(rows), output)
    else:
        click.echo(buffer.getvalue(), nl=False)
