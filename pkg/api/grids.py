import click

from api.command import common_options, execute
from models.experiment import ExperimentKind
from service.experiments import run_exp_grid, run_powerlaw_grid


@click.command("powerlaw-grid")
@common_options
@click.pass_context
def powerlaw_grid(ctx: click.Context, **options):
    """Decay of x' = -a x + k*x for power-law k over an (a, beta) grid."""
    ctx.exit(execute("powerlaw-grid", ExperimentKind.powerlaw_grid, run_powerlaw_grid, options))


@click.command("exp-grid")
@common_options
@click.pass_context
def exp_grid(ctx: click.Context, **options):
    """Fitted exponential rates against the characteristic root over an (a, beta) grid."""
    ctx.exit(execute("exp-grid", ExperimentKind.exp_grid, run_exp_grid, options))
