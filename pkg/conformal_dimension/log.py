import logging
import logging.handlers
import os
import pathlib
import sys
import typing as t

import coloredlogs

from . import constants

FORMAT = "%(asctime)s | %(name)-28s | %(levelname)-8s | %(message)s"


def _file_handler(path: pathlib.Path) -> logging.Handler:
    path.parent.mkdir(parents=True, exist_ok=True)
    # 5 MB per file, ten generations
    handler = logging.handlers.RotatingFileHandler(
        path, maxBytes=5 * (2**20), backupCount=10, encoding="utf-8"
    )
    handler.setFormatter(logging.Formatter(FORMAT))
    return handler


def _has_file_handler(logger: logging.Logger, path: pathlib.Path) -> bool:
    target = str(path.resolve())
    return any(
        isinstance(handler, logging.handlers.RotatingFileHandler)
        and handler.baseFilename == target
        for handler in logger.handlers
    )


def parse_overrides(raw: str) -> t.Dict[str, str]:
    """Parse `name=LEVEL,name=LEVEL` into a mapping, ignoring blank entries."""
    overrides: t.Dict[str, str] = {}
    for entry in filter(None, (part.strip() for part in raw.split(","))):
        name, sep, level = entry.partition("=")
        if not sep or not name.strip() or not level.strip():
            raise ValueError(f"malformed log override `{entry}`, expected `name=LEVEL`")
        overrides[name.strip()] = level.strip().upper()
    return overrides


def setup(level: t.Optional[str] = None, log_file: t.Optional[str] = None) -> None:
    """Set up loggers. Calling this again only updates levels."""
    root_logger = logging.getLogger()
    level = (level or constants.LogConfig.LEVEL).upper()

    path = pathlib.Path(log_file or constants.LogConfig.FILE)
    if not _has_file_handler(root_logger, path):
        root_logger.addHandler(_file_handler(path))

    if "COLOREDLOGS_LEVEL_STYLES" not in os.environ:
        coloredlogs.DEFAULT_LEVEL_STYLES = {
            **coloredlogs.DEFAULT_LEVEL_STYLES,
            "critical": {"background": "red"},
            "debug": coloredlogs.DEFAULT_LEVEL_STYLES["info"],
        }

    if "COLOREDLOGS_LOG_FORMAT" not in os.environ:
        coloredlogs.DEFAULT_LOG_FORMAT = FORMAT

    # stdout carries the report path for scripting
    coloredlogs.install(level=level, stream=sys.stderr)
    root_logger.setLevel(level)

    logging.getLogger("orjson").setLevel(logging.WARNING)
    for name, override in parse_overrides(constants.LogConfig.OVERRIDES).items():
        logging.getLogger(name).setLevel(override)

    root_logger.debug(f"Logging to {path} at level {level}")
