# utils/logger.py - v0.1.0
import logging
import sys

def setup_logger(level=logging.INFO):
    """
    Configures the root logger for the application.
    Logs go to stderr; reports and trajectories own stdout.
    """
    if isinstance(level, str):
        level = getattr(logging, level.upper(), logging.INFO)
    logging.basicConfig(
        level=level,
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        handlers=[
            logging.StreamHandler(sys.stderr)
        ],
        force=True,
    )
    # scipy.linalg.logm warns through the warnings module, not logging
    logging.captureWarnings(True)
    logging.getLogger("py.warnings").setLevel(logging.ERROR)
    logging.debug("Logger configured.")
