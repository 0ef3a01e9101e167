# Configuration for the Eposic package

import os

# Tolerance for generic float checks (eigenvalues, sampled covariance)
FLOAT_TOLERANCE = 1e-9

# Number of float group elements / unit vectors drawn by sampled checks
SAMPLE_COUNT = int(os.getenv("EPOSIC_SAMPLE_COUNT", "10000"))

# Seed for numpy's Generator so sampled checks are reproducible
SAMPLE_SEED = 20240101

# Float rendering in JSON / CSV output (significant digits)
DEFAULT_FLOAT_DIGITS = 17
MAX_FLOAT_DIGITS = 17

# Degree bound used by ``selftest`` when none is given
DEFAULT_SELFTEST_DEGREE = 3

# Directed-rounding precision (bits) for exact sign determination
SIGN_START_PRECISION = 64
SIGN_MAX_PRECISION = 1 << 16

# Optional on-disk cache of epsilon tables (unset disables caching)
CACHE_ENV_VAR = "EPOSIC_CACHE_DIR"
CACHE_DB_NAME = "epsilon_cache.db"

# Seconds a cache writer waits on a locked database
CACHE_BUSY_TIMEOUT = 30.0


def cache_dir():
    """Return the cache directory from the environment, or ``None``."""
    value = os.getenv(CACHE_ENV_VAR)
    return value or None
