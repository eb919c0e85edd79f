"""
Configuration Module for ShareChain
Contains scheme defaults, simulation tick budgets, chain difficulty and logging settings
"""

import os
from dotenv import load_dotenv

# Load environment variables
load_dotenv()


def _env_int(name: str, default: int) -> int:
    value = os.getenv(name)
    return int(value, 0) if value else default


def _env_bool(name: str, default: bool) -> bool:
    value = os.getenv(name)
    if value is None:
        return default
    return value.strip().lower() in ("1", "true", "yes", "on")


# =============================================================================
# SCHEME DEFAULTS
# =============================================================================
DEFAULT_ONEWAY = os.getenv("SHARECHAIN_ONEWAY", "sha256")   # modexp:g | modsquare | sha256
STRICT_VERIFICATION = _env_bool("SHARECHAIN_STRICT", True)  # Per-share honesty test
DEFAULT_SEED = _env_int("SHARECHAIN_SEED", 42)

# Primes below this bound are checked by sympy deterministically
PRIMALITY_DETERMINISTIC_BOUND = 2 ** 64

# =============================================================================
# PROTOCOL SIMULATION (logical ticks)
# =============================================================================
TAU0_TICKS = _env_int("SHARECHAIN_TAU0", 600)   # Block interval length
TAU1_TICKS = _env_int("SHARECHAIN_TAU1", 100)   # Budget to recover the block secret
ALIAS_BYTES = 4                                 # Anonymity alias = 8 hex chars

# =============================================================================
# CHAIN SETTINGS
# =============================================================================
CHAIN_PRIME = _env_int("SHARECHAIN_PRIME", 2 ** 61 - 1)
MIN_CHAIN_PRIME = 2 ** 16       # Encoding headroom rule for block secrets
BLOCK_VERSION = 1
DEFAULT_NBITS = _env_int("SHARECHAIN_NBITS", 8)
MAX_NONCE = _env_int("SHARECHAIN_MAX_NONCE", 2 ** 24)

# Consortium world
DEFAULT_NODE_COUNT = 100        # U_1 .. U_100
DEFAULT_TX_PER_INTERVAL = 20
DEFAULT_RECIPIENTS = 10         # m anonymous share recipients per block
COMMITTEE_MIN_SIZE = 4
COMMITTEE_MAX_SIZE = 16
MAX_AMOUNT = 1000               # Upper bound for generated transaction amounts
MAX_SESSION_RETRIES = 3         # Strict-mode retries after cheater identification

# =============================================================================
# LOGGING
# =============================================================================
LOG_LEVEL = os.getenv("SHARECHAIN_LOG_LEVEL", "INFO")   # DEBUG, INFO, WARNING, ERROR
LOG_TO_FILE = _env_bool("SHARECHAIN_LOG_TO_FILE", False)
LOG_FILE_PATH = os.getenv("SHARECHAIN_LOG_FILE", "sharechain_log.txt")

# =============================================================================
# DISPLAY SETTINGS
# =============================================================================
TABLE_MAX_COLUMNS = 20          # pandas display width for share tables
SHOW_BANNER = _env_bool("SHARECHAIN_BANNER", False)
