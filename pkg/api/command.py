import asyncio
import functools
import time
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from pathlib import Path
from typing import Any, Awaitable, Callable, Dict, Optional

import click
from decouple import config
from pydantic import ValidationError

from models.experiment import SPEC_TYPES, ExperimentKind, experiment_adapter, preset
from utils.errors import ConfigError, DivergenceError, DomainError
from utils.file import VERSION, experiment_dir, git_describe
from utils.logger import logger
from utils.report import write_meta, write_report

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_DIVERGENCE = 2
EXIT_IO = 3


def common_options(func):
    """Flags shared by every subcommand; each overrides the config file."""

    @click.option("--config", "config_path", type=click.Path(dir_okay=False, path_type=Path))
    @click.option(
        "--out",
        type=click.Path(file_okay=False, path_type=Path),
        default=lambda: config("GLE_LAB_OUTPUT_DIR", default="./output"),
        show_default="$GLE_LAB_OUTPUT_DIR or ./output",
    )
    @click.option("--seed", type=click.IntRange(0, 2**64 - 1))
    @click.option("--dt", type=click.FloatRange(min=0, min_open=True))
    @click.option("--t-final", type=click.FloatRange(min=0, min_open=True))
    @click.option("--batches", type=click.IntRange(min=1))
    @click.option(
        "--threads",
        type=click.IntRange(min=1),
        default=lambda: config("GLE_LAB_THREADS", default=1, cast=int),
        show_default="$GLE_LAB_THREADS or 1",
    )
    @click.option("--desk-scale", is_flag=True, help="Reduced grids for quick runs")
    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        return func(*args, **kwargs)

    return wrapper


def load_spec(
    kind: ExperimentKind,
    config_path: Optional[Path],
    desk_scale: bool,
    overrides: Dict[str, Any],
):
    """Preset, then TOML file, then CLI flags; later layers win."""
    values = preset(kind, desk_scale)
    if config_path is not None:
        try:
            with open(config_path, "rb") as f:
                data = tomllib.load(f)
        except tomllib.TOMLDecodeError as e:
            raise ConfigError(f"{config_path} is not valid TOML: {e}") from e
        if data.get("kind", kind.value) != kind.value:
            raise ConfigError(f"{config_path} describes {data['kind']}, not {kind.value}")
        values.update(data)
    fields = SPEC_TYPES[kind].model_fields
    # unset flags arrive as None or False and leave lower layers alone
    values.update(
        {k: v for k, v in overrides.items() if v is not None and v is not False and k in fields}
    )
    try:
        return experiment_adapter.validate_python(values)
    except ValidationError as e:
        raise ConfigError(f"Invalid {kind.value} config: {e}") from e


def execute(
    name: str,
    kind: ExperimentKind,
    runner: Callable[..., Awaitable],
    options: Dict[str, Any],
    dumps: bool = False,
) -> int:
    """Load the spec, run it, write report.csv and meta.txt; returns the exit code."""
    started = time.perf_counter()
    threads = options.pop("threads")
    out = options.pop("out")
    desk_scale = options.pop("desk_scale")
    try:
        spec = load_spec(kind, options.pop("config_path"), desk_scale, options)
    except (ConfigError, OSError) as e:
        logger.error(str(e))
        return EXIT_CONFIG

    try:
        directory = experiment_dir(out, name)
        logger.info(f"Running {kind.value} into {directory} with {threads} thread(s)")
        kwargs = {"directory": directory} if dumps else {}
        report = asyncio.run(runner(spec, threads=threads, **kwargs))
        write_report(report, directory)
        meta = {
            "experiment": kind.value,
            "seed": spec.seed,
            "dt": spec.dt,
            "horizon": spec.grid.horizon,
            "batches": getattr(spec, "batches", ""),
            "threads": threads,
            "desk_scale": desk_scale,
            "git_describe": git_describe(),
            "version": VERSION,
            "wall_clock_seconds": f"{time.perf_counter() - started:.3f}",
        }
        for warning in report.warnings:
            logger.warning(warning)
        write_meta(meta, directory)
    except DivergenceError as e:
        logger.error(f"{kind.value} aborted: {e}")
        return EXIT_DIVERGENCE
    except DomainError as e:
        logger.error(f"{kind.value} config cannot be built: {e}")
        return EXIT_CONFIG
    except OSError as e:
        logger.error(f"I/O failure: {e}")
        return EXIT_IO

    if report.divergent_cells:
        logger.warning(f"{report.divergent_cells} cell(s) diverged, see the status column")
        return EXIT_DIVERGENCE
    logger.info(f"{kind.value} finished in {meta['wall_clock_seconds']} s")
    return EXIT_OK
