import os
import logging
from logging.handlers import RotatingFileHandler
from dotenv import load_dotenv

from error_handling import ConfigurationError
from utils.constants import (
    DEFAULT_PRECISION, DEFAULT_THREADS, DEFAULT_TILE, ENV_LOG_FILE, ENV_LOG_LEVEL, ENV_THREADS,
    LOG_BACKUP_COUNT, LOG_FORMAT, LOG_MAX_BYTES,
)

# Handlers installed by setup_logging, so a second call can replace them
_installed_handlers = []


# Load environment variables from a .env file, if available
def load_env_variables(env_file=".env"):
    """
    Loads environment variables from a .env file into the application environment.
    All variables are optional; the process environment is used when the file is missing.

    :param env_file: Path to the .env file (default is ".env").
    :return: True if the file was found and loaded.
    """
    if os.path.exists(env_file):
        load_dotenv(dotenv_path=env_file)
        logging.info(f"Loaded environment variables from '{env_file}'")
        return True
    logging.debug(f"'{env_file}' file not found. Using system environment variables.")
    return False


def _int_from_env(name, default):
    raw = os.getenv(name)
    if raw is None or raw.strip() == '':
        return default
    try:
        value = int(raw)
    except ValueError:
        raise ConfigurationError(f"Environment variable {name} must be an integer, got '{raw}'")
    if value < 0:
        raise ConfigurationError(f"Environment variable {name} must be >= 0, got {value}")
    return value


# Retrieve kernel configuration (threads, tile, precision)
def get_kernel_config():
    """
    Retrieves kernel defaults, honouring the thread-count override from the environment.

    :return: Dictionary with 'threads', 'tile' and 'precision'.
    :raises ConfigurationError: If DMK_THREADS is not a non-negative integer.
    """
    config = {
        'threads': _int_from_env(ENV_THREADS, DEFAULT_THREADS),
        'tile': DEFAULT_TILE,
        'precision': DEFAULT_PRECISION,
    }
    logging.debug(f"Kernel configuration: {config}")
    return config


# Retrieve logging configuration
def get_logging_config():
    """
    Retrieves logging options from environment variables.

    :return: Dictionary with 'log_file' (or None) and 'log_level'.
    :raises ConfigurationError: If DMK_LOG_LEVEL is not a known level name.
    """
    level_name = os.getenv(ENV_LOG_LEVEL, 'INFO').upper()
    log_level = logging.getLevelName(level_name)
    if not isinstance(log_level, int):
        raise ConfigurationError(f"Unknown log level '{level_name}' in {ENV_LOG_LEVEL}")
    return {
        'log_file': os.getenv(ENV_LOG_FILE) or None,
        'log_level': log_level,
    }


# Configure logging with optional file rotation and console output
def setup_logging(log_file=None, log_level=logging.INFO, console_output=True):
    """
    Configures the root logger. Console output goes to stderr so results on stdout stay clean.

    :param log_file: Path to a rotating log file, or None for no file.
    :param log_level: Logging level (default: logging.INFO).
    :param console_output: If True, logs will also be printed to the console.
    """
    logger = logging.getLogger()
    logger.setLevel(log_level)

    while _installed_handlers:
        handler = _installed_handlers.pop()
        logger.removeHandler(handler)
        handler.close()

    log_format = logging.Formatter(LOG_FORMAT)

    # Rotating file handler
    if log_file:
        file_handler = RotatingFileHandler(log_file, maxBytes=LOG_MAX_BYTES, backupCount=LOG_BACKUP_COUNT)
        file_handler.setFormatter(log_format)
        logger.addHandler(file_handler)
        _installed_handlers.append(file_handler)

    # Console handler for real-time logging output (optional)
    if console_output:
        console_handler = logging.StreamHandler()
        console_handler.setFormatter(log_format)
        logger.addHandler(console_handler)
        _installed_handlers.append(console_handler)

    logging.debug("Logging has been configured successfully.")
