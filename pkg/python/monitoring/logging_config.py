"""
Logging configuration for the preaccumulation benchmark.
Provides centralized logging setup with file and console output.
"""

import logging
import colorlog
from pathlib import Path


class PreaccLogger:
    """Centralized logging system for the preaccumulation engine and harness."""

    def __init__(self, log_level="INFO", log_file="logs/preacc.log"):
        self.log_level = getattr(logging, log_level.upper())
        self.log_file = log_file
        self.logger = None
        self._setup_logging()

    def _setup_logging(self):
        """Setup logging configuration with both file and console handlers."""
        log_dir = Path(self.log_file).parent
        log_dir.mkdir(parents=True, exist_ok=True)

        self.logger = logging.getLogger('PreaccBench')
        self.logger.setLevel(self.log_level)
        self.logger.handlers.clear()

        # Console handler with colors
        console_handler = logging.StreamHandler()
        console_handler.setLevel(self.log_level)
        console_formatter = colorlog.ColoredFormatter(
            '%(log_color)s%(asctime)s - %(name)s - %(levelname)s - %(message)s',
            datefmt='%Y-%m-%d %H:%M:%S',
            log_colors={
                'DEBUG': 'cyan',
                'INFO': 'green',
                'WARNING': 'yellow',
                'ERROR': 'red',
                'CRITICAL': 'red,bg_white',
            }
        )
        console_handler.setFormatter(console_formatter)

        # File handler (no colors)
        file_handler = logging.FileHandler(self.log_file)
        file_handler.setLevel(self.log_level)
        file_formatter = logging.Formatter(
            '%(asctime)s - %(name)s - %(levelname)s - %(message)s',
            datefmt='%Y-%m-%d %H:%M:%S'
        )
        file_handler.setFormatter(file_formatter)

        self.logger.addHandler(console_handler)
        self.logger.addHandler(file_handler)

    def get_logger(self, name=None):
        """Get a logger instance with the specified name."""
        if name:
            return logging.getLogger(f'PreaccBench.{name}')
        return self.logger

    def log_region_finished(self, worker, strategy, removed, emitted):
        """Log a finished preaccumulation with its tape shrinkage."""
        self.logger.debug(
            f"PREACC: worker {worker} | {strategy} | "
            f"statements removed: {removed} | emitted: {emitted}"
        )

    def log_store_resize(self, kind, old_size, new_size):
        """Log growth of a dense adjoint vector."""
        self.logger.debug(f"RESIZE: {kind} | {old_size} -> {new_size} slots")

    def log_check_result(self, name, passed, detail=""):
        """Log the outcome of a verification check."""
        status = "PASS" if passed else "FAIL"
        message = f"CHECK: {name} | {status}"
        if detail:
            message += f" | {detail}"
        if passed:
            self.logger.info(message)
        else:
            self.logger.warning(message)

    def log_error(self, error_msg, error_type="ERROR"):
        """Log errors with specific formatting."""
        self.logger.error(f"ERROR [{error_type}]: {error_msg}")

    def log_warning(self, warning_msg):
        """Log warnings."""
        self.logger.warning(f"WARNING: {warning_msg}")


# Global logger instance
preacc_logger = PreaccLogger()


def configure_logging(log_level="INFO", log_file="logs/preacc.log"):
    """Re-initialise the global logger with a new level and file."""
    global preacc_logger
    preacc_logger = PreaccLogger(log_level=log_level, log_file=log_file)
    return preacc_logger


def get_logger(name=None):
    """Get a logger instance for the specified module."""
    return preacc_logger.get_logger(name)


def log_region_finished(worker, strategy, removed, emitted):
    """Log a finished preaccumulation."""
    preacc_logger.log_region_finished(worker, strategy, removed, emitted)


def log_store_resize(kind, old_size, new_size):
    """Log a dense store resize."""
    preacc_logger.log_store_resize(kind, old_size, new_size)


def log_check_result(name, passed, detail=""):
    """Log a verification check outcome."""
    preacc_logger.log_check_result(name, passed, detail)


def log_error(error_msg, error_type="ERROR"):
    """Log an error."""
    preacc_logger.log_error(error_msg, error_type)


def log_warning(warning_msg):
    """Log a warning."""
    preacc_logger.log_warning(warning_msg)
