import os
from dotenv import load_dotenv
from fractions import Fraction
from typing import Optional

# Load environment variables from .env file
load_dotenv()


def _flag(name: str, default: str) -> bool:
    return os.getenv(name, default).lower() == "true"


class Settings:
    """Unified configuration for gmatch (CLI, bench runner and HTTP service)"""

    # ===== APPLICATION =====
    APP_NAME: str = "gmatch"
    VERSION: str = "1.0.0"
    DEBUG: bool = _flag("DEBUG", "False")

    # ===== SERVER =====
    HOST: str = os.getenv("HOST", "0.0.0.0")
    PORT: int = int(os.getenv("PORT", "8000"))

    # ===== LOGS =====
    LOG_LEVEL: str = os.getenv("LOG_LEVEL", "INFO")

    # ===== GRAPH CORE =====
    CANONICAL_MAX_VERTICES: int = int(os.getenv("CANONICAL_MAX_VERTICES", "64"))
    BALANCE_EXHAUSTIVE_MAX_VERTICES: int = int(os.getenv("BALANCE_EXHAUSTIVE_MAX_VERTICES", "22"))
    BALANCE_PROFILE_NODES: int = int(os.getenv("BALANCE_PROFILE_NODES", "200000"))

    # ===== SAMPLING =====
    GEOMETRIC_SKIP_BELOW: float = float(os.getenv("GEOMETRIC_SKIP_BELOW", "0.01"))
    PAIRING_MAX_RETRIES: int = int(os.getenv("PAIRING_MAX_RETRIES", "100000"))
    MATCHING_MAX_RETRIES: int = int(os.getenv("MATCHING_MAX_RETRIES", "10000"))

    # ===== SEARCH BUDGETS =====
    DEFAULT_SEARCH_NODES: int = int(os.getenv("DEFAULT_SEARCH_NODES", "2000000"))
    DEFAULT_MAX_OCCURRENCES: int = int(os.getenv("DEFAULT_MAX_OCCURRENCES", "200000"))
    DEFAULT_TRIAL_SECONDS: Optional[float] = (
        float(os.getenv("DEFAULT_TRIAL_SECONDS")) if os.getenv("DEFAULT_TRIAL_SECONDS") else None
    )
    # hosts larger than this must be searched with an explicit budget
    BUDGET_REQUIRED_HOST_VERTICES: int = int(os.getenv("BUDGET_REQUIRED_HOST_VERTICES", "64"))

    # ===== TEST FAMILIES =====
    DEFAULT_ALPHA: str = os.getenv("DEFAULT_ALPHA", "12/25")
    FAMILY_MAX_CANDIDATES: int = int(os.getenv("FAMILY_MAX_CANDIDATES", "2000"))
    FAMILY_V_LOG_FACTOR: float = float(os.getenv("FAMILY_V_LOG_FACTOR", "4"))
    PAIR_CHECK_NODES: int = int(os.getenv("PAIR_CHECK_NODES", "500000"))

    # ===== DISTINGUISHER =====
    EXPECTATION_MAX_EDGES: int = int(os.getenv("EXPECTATION_MAX_EDGES", "12"))
    CALIBRATION_TRIALS: int = int(os.getenv("CALIBRATION_TRIALS", "200"))
    CALIBRATION_K: float = float(os.getenv("CALIBRATION_K", "2.0"))

    # ===== HARNESS =====
    WORKERS: int = int(os.getenv("WORKERS", "1"))
    RECORD_WALL_CLOCK: bool = _flag("RECORD_WALL_CLOCK", "False")

    @classmethod
    def validate_required(cls) -> bool:
        """Reject inconsistent configuration values"""
        errors = []

        if cls.CANONICAL_MAX_VERTICES < 1:
            errors.append("❌ CANONICAL_MAX_VERTICES must be positive")
        if not 1 <= cls.BALANCE_EXHAUSTIVE_MAX_VERTICES <= 30:
            errors.append("❌ BALANCE_EXHAUSTIVE_MAX_VERTICES must lie in 1..30")
        if not 0.0 <= cls.GEOMETRIC_SKIP_BELOW <= 1.0:
            errors.append("❌ GEOMETRIC_SKIP_BELOW must be a probability")
        if cls.DEFAULT_SEARCH_NODES < 1 or cls.DEFAULT_MAX_OCCURRENCES < 1:
            errors.append("❌ search budgets must be positive")
        if cls.WORKERS < 1:
            errors.append("❌ WORKERS must be at least 1")
        try:
            alpha = Fraction(cls.DEFAULT_ALPHA)
            if not Fraction(12, 25) <= alpha <= 1:
                errors.append("❌ DEFAULT_ALPHA must lie in [12/25, 1]")
        except ValueError:
            errors.append(f"❌ DEFAULT_ALPHA is not a rational: {cls.DEFAULT_ALPHA}")

        if errors:
            raise ValueError("\n".join(errors))

        return True

    @classmethod
    def get_budget_defaults(cls) -> dict:
        """Default search budget used when callers pass none"""
        return {
            "nodes": cls.DEFAULT_SEARCH_NODES,
            "max_occurrences": cls.DEFAULT_MAX_OCCURRENCES,
            "seconds": cls.DEFAULT_TRIAL_SECONDS,
        }

    @classmethod
    def get_server_config(cls) -> dict:
        """HTTP server settings"""
        return {
            "host": cls.HOST,
            "port": cls.PORT,
            "reload": cls.DEBUG,
        }

    @classmethod
    def default_alpha(cls) -> Fraction:
        return Fraction(cls.DEFAULT_ALPHA)


# Global settings instance
settings = Settings()

# Alias kept for modules that import Config
Config = settings
