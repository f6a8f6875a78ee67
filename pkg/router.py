import click

from api import grids, perturb, simulate


@click.group()
def cli():
    """Memory-kernel error experiments for generalized Langevin equations."""


cli.add_command(grids.powerlaw_grid)
cli.add_command(grids.exp_grid)
cli.add_command(perturb.gle1_perturb)
cli.add_command(perturb.gle2_perturb)
cli.add_command(simulate.simulate)
