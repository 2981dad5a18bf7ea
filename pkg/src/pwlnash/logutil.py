﻿# encoding: utf-8-sig

import os
import sys
import logging
from pathlib import Path
from typing import Optional

# globals
logger_obj: Optional[logging.Logger] = None
is_initialized: bool = False

DEFAULT_LOGGER_NAME = "pwlnash"
DEFAULT_LOG_LEVEL = logging.WARNING
DEFAULT_FILE_LEVEL = logging.WARNING
DEFAULT_CONSOLE_LEVEL = logging.DEBUG

# ----------------------------------------------------------------------------
def default_log_file() -> Path:
    """
    Location of the log file when none is given.

    Returns:
        Path: ~/.pwlnash/log/pwlnash.log
    """
    user_home = os.path.expanduser("~")
    return Path(user_home) / ".pwlnash" / "log" / "pwlnash.log"

# ----------------------------------------------------------------------------
def get_with_init(
    log_file: str | os.PathLike | None = None,
    *,
    level: int = DEFAULT_LOG_LEVEL,
    file_level: int = DEFAULT_FILE_LEVEL,
    console_level: int = DEFAULT_CONSOLE_LEVEL,
    force: bool = False
) -> logging.Logger:
    """
    Initialize the logger with the specified configuration.
    If the logger is already initialized, the existing logger is returned
    unless `force` is set, in which case its handlers are rebuilt.

    Args:
        log_file (str | os.PathLike | None, optional): Defaults to None.
        level (int, optional): Defaults to DEFAULT_LOG_LEVEL.
        file_level (int, optional):  Defaults to DEFAULT_FILE_LEVEL.
        console_level (int, optional):  Defaults to DEFAULT_CONSOLE_LEVEL.
        force (bool, optional):  Defaults to False.

    Returns:
        logging.Logger: Logger instance for the pwlnash package.
    """
    global logger_obj, is_initialized

    if is_initialized and not force:
        logger_obj.setLevel(level=level)
        return logger_obj

    log_path = Path(log_file) if log_file is not None else default_log_file()
    try:
        log_path.parent.mkdir(parents=True, exist_ok=True)
    except OSError:
        # the console handler is still installed below
        pass

    logger_obj = logging.getLogger(DEFAULT_LOGGER_NAME)
    for handler in list(logger_obj.handlers):
        logger_obj.removeHandler(handler)
        handler.close()
    logger_obj.setLevel(level=level)
    formatter = logging.Formatter(
        '%(asctime)s [%(name)s] [%(levelname)s] %(message)s'
    )

    try:
        file_handler = logging.FileHandler(log_path, encoding="utf-8")
        file_handler.setFormatter(formatter)
        file_handler.setLevel(file_level)
        logger_obj.addHandler(file_handler)
    except (OSError, PermissionError):
        pass

    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setFormatter(formatter)
    console_handler.setLevel(console_level)
    logger_obj.addHandler(console_handler)

    is_initialized = True
    return logger_obj

# ----------------------------------------------------------------------------
def get_logger(verbose_level: int | None = None) -> logging.Logger:
    """
    Module-level shortcut to get the logger.

    Args:
        verbose_level (int | None): 0 warning, 1 info, 2 debug.
            Any other value yields None.

    Returns:
        logging.Logger: Logger instance for the pwlnash package.
    """
    log_obj = None
    if verbose_level is not None:
        if verbose_level == 0:
            log_obj = get_with_init(level=logging.WARNING)
        elif verbose_level == 1:
            log_obj = get_with_init(level=logging.INFO)
        elif verbose_level == 2:
            log_obj = get_with_init(level=logging.DEBUG)
    elif is_initialized:
        log_obj = logger_obj
    else:
        log_obj = get_with_init()
    return log_obj


__all__ = ["get_logger", "get_with_init", "default_log_file"]
