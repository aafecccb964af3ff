"""
Configuration for galrep computations

Handles environment loading and the enumeration caps shared by every module.
"""

import os
from dataclasses import dataclass, field
from pathlib import Path

from dotenv import load_dotenv

# =============================================================================
# STEP 1: Load Environment Variables
# =============================================================================


def load_environment_variables() -> None:
    """Load environment variables from .env file if present."""
    env_file = Path(__file__).parent / ".env"
    if env_file.exists():
        load_dotenv(env_file)


def _env_int(name: str, default: int) -> int:
    raw = os.environ.get(name)
    if raw is None or not raw.strip():
        return default
    return int(raw.replace("_", ""))


# =============================================================================
# STEP 2: Engine Configuration (caps and seeds)
# =============================================================================


@dataclass
class EngineConfiguration:
    """Caps, seeds and defaults used by the algebra and the sieves."""

    budget: int = field(default_factory=lambda: _env_int("GALREP_BUDGET", 1_000_000))
    closure_cap: int = field(
        default_factory=lambda: _env_int("GALREP_CLOSURE_CAP", 100_000)
    )
    cohomology_cap: int = field(
        default_factory=lambda: _env_int("GALREP_COHOMOLOGY_CAP", 512)
    )
    h2_cap: int = field(default_factory=lambda: _env_int("GALREP_H2_CAP", 32))
    spin_vectors: int = 32
    seed: int = field(default_factory=lambda: _env_int("GALREP_SEED", 20240917))
    min_signatures: int = 20
    default_aux_bound: int = 1000
    log_level: str = field(
        default_factory=lambda: os.environ.get("GALREP_LOG_LEVEL", "WARNING")
    )

    @property
    def dense_entry_cap(self) -> int:
        """Largest rows x columns product accepted for a dense cochain system."""
        return self.budget * 100


# =============================================================================
# STEP 3: Create the shared configuration
# =============================================================================

load_environment_variables()

config = EngineConfiguration()


def reload_config() -> EngineConfiguration:
    """Re-read the environment (used by the CLI after option parsing and by tests)."""
    global config
    config = EngineConfiguration()
    return config
