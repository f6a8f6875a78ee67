import click

from api.command import common_options, execute
from models.experiment import ExperimentKind
from service.experiments import run_first_order_perturb, run_second_order_perturb


@click.command("gle1-perturb")
@common_options
@click.option("--dump", is_flag=True, help="Write trajectory CSVs for every ensemble")
@click.pass_context
def gle1_perturb(ctx: click.Context, **options):
    """First-order GLE: bound constants against squared kernel errors per perturbation family."""
    ctx.exit(
        execute(
            "gle1-perturb",
            ExperimentKind.first_order_perturb,
            run_first_order_perturb,
            options,
            dumps=True,
        )
    )


@click.command("gle2-perturb")
@common_options
@click.option("--dump", is_flag=True, help="Write trajectory CSVs for every ensemble")
@click.pass_context
def gle2_perturb(ctx: click.Context, **options):
    """Second-order GLE in a confining potential, compared through the Lyapunov distance."""
    ctx.exit(
        execute(
            "gle2-perturb",
            ExperimentKind.second_order_perturb,
            run_second_order_perturb,
            options,
            dumps=True,
        )
    )
