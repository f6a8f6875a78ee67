from pathlib import Path
from typing import Any, Dict, List

import pandas as pd

from models.experiment import ExperimentReport
from models.simulation import Trajectory
from utils.logger import logger

CSV_OPTIONS = {"index": False, "float_format": "%.17g", "lineterminator": "\n", "na_rep": ""}


def _write_frame(rows: List[Dict[str, Any]], path: Path) -> Path:
    try:
        pd.DataFrame(rows).to_csv(path, **CSV_OPTIONS)
    except OSError as e:
        logger.error(f"Could not write {path}: {e}")
        raise
    return path


def write_report(report: ExperimentReport, directory: Path) -> List[Path]:
    """report.csv with one row per cell, plus summary.csv when the experiment aggregates."""
    paths = [_write_frame(report.rows, Path(directory) / "report.csv")]
    if report.summary:
        paths.append(_write_frame(report.summary, Path(directory) / "summary.csv"))
    for path in paths:
        logger.info(f"Wrote {path}")
    return paths


def write_trajectory(trajectory: Trajectory, path: Path) -> Path:
    """Columns t, component_0 .. component_{k-1}."""
    frame = pd.DataFrame(
        trajectory.states,
        columns=[f"component_{i}" for i in range(trajectory.states.shape[1])],
    )
    frame.insert(0, "t", trajectory.grid.times)
    try:
        frame.to_csv(path, **CSV_OPTIONS)
    except OSError as e:
        logger.error(f"Could not write trajectory dump {path}: {e}")
        raise
    return path


def write_meta(meta: Dict[str, Any], directory: Path) -> Path:
    path = Path(directory) / "meta.txt"
    try:
        path.write_text("".join(f"{key}: {value}\n" for key, value in meta.items()))
    except OSError as e:
        logger.error(f"Could not write {path}: {e}")
        raise
    return path
