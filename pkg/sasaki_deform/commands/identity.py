"""identity: 环境结构恒等式的数值检查"""

from typing import Optional

import click

from sasaki_deform.ambient.identities import identity_check
from sasaki_deform.commands.common import emit, finish, handle_errors, structure_for
from sasaki_deform.core.config import settings
from sasaki_deform.schemas.run import RunConfig


@click.command("identity")
@click.option("--n", "n", type=click.IntRange(1, 2), default=2, show_default=True)
@click.option("--kappa", type=float, default=None, help="κ > 0，缺省 n+1")
@click.option("--theta", type=float, default=0.0, show_default=True)
@click.option("--samples", type=click.IntRange(min=1), default=100, show_default=True)
@click.option("--seed", type=int, default=None, help="缺省取 SASAKI_DEFORM_SEED")
@click.option("-o", "--output", type=click.Path(dir_okay=False), default=None)
@handle_errors
def identity(
    n: int,
    kappa: Optional[float],
    theta: float,
    samples: int,
    seed: Optional[int],
    output: Optional[str],
) -> None:
    """Check the sphere/cone structure identities at random samples."""
    config = RunConfig(
        command="identity",
        n=n,
        kappa=kappa,
        theta=theta,
        seed=settings.SEED if seed is None else seed,
        output=output,
    )
    structure = structure_for(n, config.kappa, theta)
    report = identity_check(structure, samples=samples, seed=config.seed)
    emit(report, output)
    finish(report.passed)
