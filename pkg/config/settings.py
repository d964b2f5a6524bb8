"""
Application settings and configuration
"""
import os
from typing import Optional, Tuple
from dotenv import load_dotenv

# Load environment variables
load_dotenv()


def _env_bool(name: str, default: str) -> bool:
    return os.getenv(name, default).lower() == "true"


class Settings:
    # Application Settings
    APP_NAME: str = "gptgeo"
    APP_VERSION: str = "1.0.0"
    DEBUG: bool = _env_bool("DEBUG", "False")
    LOG_LEVEL: str = os.getenv("GPTGEO_LOG_LEVEL", "WARNING")

    # LP kernel
    LP_TOL: float = float(os.getenv("GPTGEO_TOL", "1e-9"))
    LP_ITERATION_FACTOR: int = int(os.getenv("GPTGEO_LP_ITERATION_FACTOR", "50"))
    LP_DEGENERATE_STREAK: int = int(os.getenv("GPTGEO_LP_DEGENERATE_STREAK", "25"))
    LP_EXACT_FALLBACK: bool = _env_bool("GPTGEO_LP_EXACT_FALLBACK", "True")
    LP_DUMP_DIR: Optional[str] = os.getenv("GPTGEO_LP_DUMP_DIR")

    # Identity checks
    IDENTITY_TOL: float = float(os.getenv("GPTGEO_IDENTITY_TOL", "1e-6"))
    CROSS_CHECK_TOL: float = 1e-8
    INTERIOR_TOL: float = 1e-7
    DEDUP_TOL: float = 1e-12
    SAMPLE_DEDUP_TOL: float = 1e-6
    HELSTROM_TOL: float = 1e-7
    FAMILY_TOL: float = 1e-9
    CRITICAL_TOL: float = 1e-7

    # Cone order: "vertex" (conic weights), "facet" (facet functionals) or "auto"
    CONE_ROUTE: str = os.getenv("GPTGEO_CONE_ROUTE", "auto")
    VERTEX_ROUTE_LIMIT: int = int(os.getenv("GPTGEO_VERTEX_ROUTE_LIMIT", "1200"))

    # Capacity search
    SUBSET_CAP: int = int(os.getenv("GPTGEO_SUBSET_CAP", "12"))
    # vertex subsets enumerated exhaustively up to this count, sampled above it
    CAPACITY_SUBSET_BUDGET: int = int(os.getenv("GPTGEO_CAPACITY_SUBSET_BUDGET", "64"))
    BA_TOL: float = float(os.getenv("GPTGEO_BA_TOL", "1e-9"))
    BA_MAX_ITER: int = int(os.getenv("GPTGEO_BA_MAX_ITER", "100000"))
    CAPACITY_SEEDS: Tuple[int, ...] = (0, 1, 2, 3)

    # Generators
    RANDOM_MODEL_RETRIES: int = 20
    MAX_GROUP_ORDER: int = 100000

    def __init__(self):
        """Validate tolerance settings."""
        if self.LP_TOL <= 0:
            raise ValueError("GPTGEO_TOL must be positive")
        if self.LP_ITERATION_FACTOR < 1:
            raise ValueError("GPTGEO_LP_ITERATION_FACTOR must be at least 1")
        if self.CONE_ROUTE not in ("auto", "vertex", "facet"):
            raise ValueError("GPTGEO_CONE_ROUTE must be auto, vertex or facet")
        if self.CAPACITY_SUBSET_BUDGET < 1:
            raise ValueError("GPTGEO_CAPACITY_SUBSET_BUDGET must be at least 1")


settings = Settings()
