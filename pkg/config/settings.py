# config/settings.py - v0.1.0
import os
from dotenv import load_dotenv
import logging

logger = logging.getLogger(__name__)

# Optional .env at the repository root overrides the defaults below
BASE_DIR = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
dotenv_path = os.path.join(BASE_DIR, '.env')
if os.path.exists(dotenv_path):
    load_dotenv(dotenv_path)
    logger.info(f".env file loaded from {dotenv_path}")
else:
    logger.debug(f".env file not found at {dotenv_path}. Using defaults and the process environment.")

invalid_vars = []


def _env_number(name: str, default, cast=float):
    raw = os.getenv(name)
    if raw is None or raw == "":
        return default
    try:
        value = cast(raw)
    except ValueError:
        invalid_vars.append(name)
        return default
    if value < 0:
        invalid_vars.append(name)
        return default
    return value


LOG_LEVEL = os.getenv("POSTLIE_LOG_LEVEL", "INFO").upper()

# Parallelism and reproducibility
THREADS = max(1, _env_number("POSTLIE_THREADS", 1, int))
SEED = _env_number("POSTLIE_SEED", 42, int)

# lie_core
BCH_RADIUS = _env_number("POSTLIE_BCH_RADIUS", 0.5)
DET_FLOOR = _env_number("POSTLIE_DET_FLOOR", 1e-12)

# splitting
VALIDATION_TOL = _env_number("POSTLIE_VALIDATION_TOL", 1e-10)
VALIDATION_SAMPLES = _env_number("POSTLIE_VALIDATION_SAMPLES", 100, int)

# chi_magnus
CHI_TOL = _env_number("POSTLIE_CHI_TOL", 1e-14)
CHI_MAX_ITER = _env_number("POSTLIE_CHI_MAX_ITER", 200, int)
MAGNUS_ORDER = _env_number("POSTLIE_MAGNUS_ORDER", 8, int)

# flow
SUBSTEP_CAP = _env_number("POSTLIE_SUBSTEP_CAP", 0.2)
RK4_STEP = _env_number("POSTLIE_RK4_STEP", 1e-4)
ORTHO_TOL = _env_number("POSTLIE_ORTHO_TOL", 1e-10)
DRIFT_BOUND = _env_number("POSTLIE_DRIFT_BOUND", 1e-10)
DEFECT_BOUND = _env_number("POSTLIE_DEFECT_BOUND", 1e-1)

if LOG_LEVEL not in ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"):
    invalid_vars.append("POSTLIE_LOG_LEVEL")
    LOG_LEVEL = "INFO"

if invalid_vars:
    logger.error(f"Invalid values for environment variables: {', '.join(invalid_vars)}. Defaults were used instead.")
