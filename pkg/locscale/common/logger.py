# locscale/common/logger.py

import logging
import sys
from logging.handlers import TimedRotatingFileHandler
from pathlib import Path
from typing import List, Optional

from . import config

FORMATTER = logging.Formatter("%(asctime)s - %(name)s - %(levelname)s - %(message)s")
RETENTION_DAYS = 30


def _rotating_file(directory: Path, name: str) -> TimedRotatingFileHandler:
    directory.mkdir(parents=True, exist_ok=True)
    # delay=True: a run that never logs leaves no empty file behind
    handler = TimedRotatingFileHandler(directory / f"{name}.log", when="midnight", backupCount=RETENTION_DAYS,
                                       encoding="utf-8", delay=True)
    handler.setFormatter(FORMATTER)
    return handler


def _handlers_for(name: str, log_dir: Optional[Path]) -> List[logging.Handler]:
    handlers: List[logging.Handler] = []
    if config.LOG_TO_FILE:
        handlers.append(_rotating_file(log_dir if log_dir is not None else config.LOG_DIR, name))
    console = logging.StreamHandler(sys.stdout)
    console.setFormatter(FORMATTER)
    handlers.append(console)
    return handlers


def get_logger(logger_name: str, log_dir: Optional[Path] = None) -> logging.Logger:
    """
    Named logger for one locscale module: stdout plus, unless
    LOCSCALE_LOG_TO_FILE=0, a file under LOCSCALE_LOG_DIR (or `log_dir`)
    rotated at midnight.

    Calling it again for the same name replaces the handlers instead of
    adding a second set.
    """
    log = logging.getLogger(logger_name)
    log.setLevel(getattr(logging, config.LOG_LEVEL, logging.INFO))
    for old in list(log.handlers):
        log.removeHandler(old)
        old.close()
    for handler in _handlers_for(logger_name, log_dir):
        log.addHandler(handler)
    log.propagate = False
    return log
