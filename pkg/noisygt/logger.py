# noisygt/logger.py
import logging
import queue
import sys
from logging.handlers import QueueHandler, QueueListener, RotatingFileHandler
from pathlib import Path
from typing import Optional, Union

from rich.console import Console
from rich.logging import RichHandler

LOGGER_NAME = "noisygt"
LOG_FILE = Path("noisygt.log")
MAX_LOG_SIZE_MB = 5
BACKUP_COUNT = 3

rich_console_for_logging = Console(stderr=True)
log_queue: "queue.Queue[logging.LogRecord]" = queue.Queue(-1)

# started by the first setup_logger call that has a log file
_queue_listener: Optional[QueueListener] = None


def setup_logger(
    verbose: bool = False,
    quiet: bool = False,
    log_file: Optional[Union[str, Path]] = LOG_FILE,
) -> logging.Logger:
    """Console logging through Rich and, unless log_file is None, a rotating file behind a queue."""
    global _queue_listener
    logger = logging.getLogger(LOGGER_NAME)
    logger.setLevel(logging.DEBUG)
    logger.propagate = False

    if logger.hasHandlers():
        logger.handlers.clear()

    if log_file is not None:
        try:
            file_handler = RotatingFileHandler(
                log_file,
                maxBytes=MAX_LOG_SIZE_MB * 1024 * 1024,
                backupCount=BACKUP_COUNT,
                encoding="utf-8",
            )
            file_handler.setFormatter(
                logging.Formatter(
                    "%(asctime)s - %(name)s - %(levelname)s - T%(threadName)s - %(module)s.%(funcName)s:%(lineno)d - %(message)s"
                )
            )
            file_handler.setLevel(logging.DEBUG if verbose else logging.INFO)
            if _queue_listener is not None:
                _queue_listener.stop()
            # worker threads only enqueue; the listener does the file I/O
            _queue_listener = QueueListener(log_queue, file_handler, respect_handler_level=True)
            _queue_listener.start()
            logger.addHandler(QueueHandler(log_queue))
        except OSError as e:
            sys.stderr.write(f"CRITICAL: Failed to initialize file logging at {log_file}: {e}\n")

    if quiet:
        error_ch = logging.StreamHandler(sys.stderr)
        error_ch.name = "critical_stderr_handler"
        error_ch.setFormatter(logging.Formatter("CRITICAL ERROR: %(message)s"))
        error_ch.setLevel(logging.CRITICAL)
        logger.addHandler(error_ch)
    else:
        logger.addHandler(
            RichHandler(
                level=logging.DEBUG if verbose else logging.INFO,
                console=rich_console_for_logging,
                show_time=True,
                show_level=True,
                show_path=False,
                markup=False,
                rich_tracebacks=True,
                tracebacks_show_locals=verbose,
                log_time_format="[%X]",
            )
        )

    logger.debug(f"Logger ready. File: {log_file}, verbose: {verbose}, quiet: {quiet}")
    return logger


def stop_logger_queue_listener() -> None:
    """Flushes queued file records and stops the listener."""
    global _queue_listener
    if _queue_listener is not None:
        logging.getLogger(LOGGER_NAME).debug("Stopping logger queue listener")
        _queue_listener.stop()
        _queue_listener = None
