# =============================================================================
# A3T Desk - Configuration Settings
# =============================================================================
"""
Application settings loaded from environment variables.

All configuration is centralized here for easy maintenance.
Environment variables are loaded from .env file using python-dotenv.
Every variable uses the ``A3T_`` prefix.
"""

import os
from pathlib import Path
from dataclasses import dataclass, field
from typing import List
from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()


@dataclass
class Settings:
    """
    Application configuration container.

    All settings are loaded from environment variables with sensible defaults.
    Use the global `settings` instance instead of creating new instances.
    """

    # =========================================================================
    # Path Configuration
    # =========================================================================
    BASE_DIR: Path = field(default_factory=lambda: Path(__file__).parent.parent.absolute())

    @property
    def DATA_DIR(self) -> Path:
        """Directory for shipped data files (resource tables, example specs)."""
        return Path(os.getenv("A3T_DATA_DIR", str(self.BASE_DIR / "data")))

    @property
    def RESOURCES_DIR(self) -> Path:
        """Directory holding ``tables/*.tsv`` and ``classes/*.txt``."""
        return Path(os.getenv("A3T_RESOURCES_DIR", str(self.DATA_DIR)))

    @property
    def OUTPUT_DIR(self) -> Path:
        """Directory for checkpoints, training logs and reports."""
        return Path(os.getenv("A3T_OUTPUT_DIR", str(self.BASE_DIR / "runs")))

    # =========================================================================
    # Runtime Configuration
    # =========================================================================
    @property
    def LOG_LEVEL(self) -> str:
        return os.getenv("A3T_LOG_LEVEL", "INFO").upper()

    @property
    def SEED(self) -> int:
        return int(os.getenv("A3T_SEED", "0"))

    @property
    def THREADS(self) -> int:
        return int(os.getenv("A3T_THREADS", "1"))

    @property
    def DTYPE(self) -> str:
        """Floating point type used for training (float32 or float64)."""
        return os.getenv("A3T_DTYPE", "float32")

    # =========================================================================
    # Perturbation Space Limits
    # =========================================================================
    @property
    def MAX_DP_STATES(self) -> int:
        """Upper bound on positions x residual-budget states in plan counting."""
        return int(os.getenv("A3T_MAX_DP_STATES", str(10 ** 7)))

    @property
    def ORACLE_MAX_MATCHES(self) -> int:
        """Largest match count the brute-force oracle accepts."""
        return int(os.getenv("A3T_ORACLE_MAX_MATCHES", "12"))

    @property
    def MAX_SPACE(self) -> int:
        """Per-example budget for exhaustive enumeration."""
        return int(os.getenv("A3T_MAX_SPACE", str(10 ** 5)))

    @property
    def CONTAINMENT_TOLERANCE(self) -> float:
        return float(os.getenv("A3T_CONTAINMENT_TOLERANCE", "1e-6"))

    # =========================================================================
    # Attack / Training Defaults
    # =========================================================================
    @property
    def AUGMENT_K(self) -> int:
        return int(os.getenv("A3T_AUGMENT_K", "2"))

    @property
    def TRAIN_BEAM_K(self) -> int:
        return int(os.getenv("A3T_TRAIN_BEAM_K", "2"))

    @property
    def EVAL_BEAM_K(self) -> int:
        return int(os.getenv("A3T_EVAL_BEAM_K", "10"))

    @property
    def EVAL_BATCH_SIZE(self) -> int:
        """Batch size for concrete forward passes during search and evaluation."""
        return int(os.getenv("A3T_EVAL_BATCH_SIZE", "256"))

    # =========================================================================
    # Utility Methods
    # =========================================================================
    def ensure_output_dir(self) -> None:
        """Ensure the output directory exists."""
        self.OUTPUT_DIR.mkdir(parents=True, exist_ok=True)

    def validate(self) -> List[str]:
        """
        Validate configuration and return list of warnings.

        Returns:
            List of warning messages for missing or invalid config.
        """
        warnings = []

        if not (self.RESOURCES_DIR / "tables").is_dir():
            warnings.append(f"No tables/ directory under {self.RESOURCES_DIR} - SubAdj/InsAdj/SubSyn unavailable")

        if not (self.RESOURCES_DIR / "classes").is_dir():
            warnings.append(f"No classes/ directory under {self.RESOURCES_DIR} - DelStop unavailable")

        if self.DTYPE not in ("float32", "float64"):
            warnings.append(f"A3T_DTYPE={self.DTYPE} is not float32/float64 - using float32")

        if self.THREADS < 1:
            warnings.append("A3T_THREADS < 1 - using a single worker")

        if self.ORACLE_MAX_MATCHES > 20:
            warnings.append("A3T_ORACLE_MAX_MATCHES > 20 - brute-force oracle may not terminate in reasonable time")

        return warnings

    @property
    def numpy_dtype(self) -> str:
        """Validated dtype name."""
        return self.DTYPE if self.DTYPE in ("float32", "float64") else "float32"


# =============================================================================
# Global Settings Instance
# =============================================================================

settings = Settings()

# Backward compatibility alias
config = settings
