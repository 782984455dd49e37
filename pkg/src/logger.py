"""
Logger configuration for the Koopman–von Neumann laboratory.
"""

import logging
import os

DEFAULT_LOG_FILE = os.path.join("logs", "kvn_lab.log")


def setup_logger(name: str, log_file: str = DEFAULT_LOG_FILE, level: int = logging.INFO) -> logging.Logger:
    """
    Configure and return a logger that writes to both console and file.

    Args:
        name: Logger name
        log_file: Path to the log file
        level: Logging level

    Returns:
        Configured logger instance
    """
    # Create logs directory if it doesn't exist
    log_dir = os.path.dirname(log_file)
    if log_dir:
        os.makedirs(log_dir, exist_ok=True)

    logger = logging.getLogger(name)

    # Only add handlers if they don't exist yet
    if not logger.handlers:
        logger.setLevel(level)

        formatter = logging.Formatter('%(asctime)s - %(name)s - %(levelname)s - %(message)s')

        file_handler = logging.FileHandler(log_file)
        file_handler.setFormatter(formatter)

        console_handler = logging.StreamHandler()
        console_handler.setFormatter(formatter)

        logger.addHandler(file_handler)
        logger.addHandler(console_handler)

    return logger


def set_level(level_name: str) -> int:
    """
    Re-level every logger created through setup_logger.

    Args:
        level_name: One of DEBUG, INFO, WARNING, ERROR, CRITICAL

    Returns:
        The numeric level that was applied
    """
    level = getattr(logging, level_name.upper(), logging.INFO)
    for name, candidate in logging.Logger.manager.loggerDict.items():
        if not isinstance(candidate, logging.Logger):
            continue
        if name == "main" or name.startswith("src"):
            candidate.setLevel(level)
            for handler in candidate.handlers:
                handler.setLevel(level)
    return level
