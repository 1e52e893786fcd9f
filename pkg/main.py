# main.py - v0.1.0
import logging
import sys

from cli.command_handler import EXIT_INPUT_ERROR, main
from config.settings import LOG_LEVEL, invalid_vars
from utils.logger import setup_logger

if __name__ == "__main__":
    setup_logger(LOG_LEVEL)
    logger = logging.getLogger(__name__)

    if invalid_vars:
        logger.error(f"Exiting due to invalid environment variables: {', '.join(invalid_vars)}")
        sys.exit(EXIT_INPUT_ERROR)

    try:
        sys.exit(main(sys.argv[1:]))
    except KeyboardInterrupt:
        logger.info("Interrupted by user (KeyboardInterrupt).")
        sys.exit(130)
