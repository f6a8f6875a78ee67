import click

from api.command import common_options, execute
from models.experiment import ExperimentKind
from service.experiments import run_simulate


@click.command("simulate")
@common_options
@click.pass_context
def simulate(ctx: click.Context, **options):
    """One-off ensemble with a trajectory CSV per batch."""
    ctx.exit(execute("simulate", ExperimentKind.simulate, run_simulate, options, dumps=True))
