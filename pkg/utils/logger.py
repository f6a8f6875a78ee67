import logging
from typing import Optional

import colorlog
from decouple import config
from tqdm import tqdm

LOG_COLORS = {
    "DEBUG": "cyan",
    "INFO": "green",
    "WARNING": "yellow",
    "ERROR": "red",
    "CRITICAL": "bold_red",
}


class CustomFormatter(colorlog.ColoredFormatter):
    def __init__(self):
        super().__init__(
            "%(log_color)s%(asctime)s %(levelname)s %(name)s %(message)s",
            datefmt="%Y-%m-%d %H:%M:%S",
            log_colors=LOG_COLORS,
            reset=True,
            style="%",
        )


class TqdmHandler(logging.StreamHandler):
    """Writes through tqdm so records do not tear running progress bars."""

    def emit(self, record: logging.LogRecord) -> None:
        try:
            tqdm.write(self.format(record), file=self.stream)
            self.flush()
        except Exception:
            self.handleError(record)


def setup_custom_logger(name: str, level: Optional[str] = None) -> logging.Logger:
    logger = logging.getLogger(name)
    logger.handlers = []

    handler = TqdmHandler()
    handler.setFormatter(CustomFormatter())
    logger.addHandler(handler)

    logger.setLevel((level or config("GLE_LAB_LOG_LEVEL", default="INFO")).upper())
    logger.propagate = False
    return logger


logger: logging.Logger = setup_custom_logger("gle_lab")
