import subprocess
from pathlib import Path

from utils.logger import logger

VERSION = "0.1.0"
REPO_ROOT = Path(__file__).resolve().parent.parent


def experiment_dir(out: Path, experiment: str) -> Path:
    """{out}/{experiment}, created on demand."""
    path = Path(out) / experiment
    path.mkdir(parents=True, exist_ok=True)
    return path


def dump_path(directory: Path, run_id: str, system: str, batch: int) -> Path:
    path = Path(directory) / "dumps" / run_id / system
    path.mkdir(parents=True, exist_ok=True)
    return path / f"{batch}.csv"


def git_describe() -> str:
    try:
        result = subprocess.run(
            ["git", "describe", "--always", "--dirty", "--tags"],
            cwd=REPO_ROOT,
            capture_output=True,
            text=True,
            timeout=10,
        )
    except (OSError, subprocess.SubprocessError) as e:
        logger.debug(f"git describe failed: {e}")
        return "unknown"
    return result.stdout.strip() if result.returncode == 0 else "unknown"
