"""Application configuration and settings."""
import logging
from pydantic_settings import BaseSettings, SettingsConfigDict

logger = logging.getLogger(__name__)


class Settings(BaseSettings):
    """Tolerances, enumeration caps and service options loaded from environment variables."""

    # Linear algebra
    SINGULAR_RTOL: float = 1e-12  # pivot threshold, relative to max |entry|
    INVERT_RTOL: float = 1e-8
    DETERMINANT_RTOL: float = 1e-12  # sign-indeterminate band, relative to the Hadamard bound
    KRON_CAP: int = 4096

    # Certificates
    DECISION_TOL: float = 0.0
    BOUNDARY_RTOL: float = 1e-12

    # Enumeration
    ENUM_CAP: int = 2 ** 20
    ORACLE_WARN_ORDER: int = 20
    ORACLE_FALLBACK_MAX_ORDER: int = 12
    SIGN_SLACK: float = 1e-10
    DEDUP_TOL: float = 1e-8
    PROBE_SAMPLES: int = 200
    PROBE_SEED: int = 0

    # Picard iteration
    MAX_ITERATIONS: int = 10000
    STEP_TOLERANCE: float = 1e-12
    RESIDUAL_TOLERANCE: float = 1e-10

    # Instance generation
    GENERATION_ATTEMPTS: int = 100
    GENERATION_MIN_RCOND: float = 1e-8

    # Service
    API_KEY: str = "CHANGE_ME_IN_PRODUCTION"
    API_V1_PREFIX: str = "/api/v1"
    RATE_LIMIT: str = "30/minute"

    # Application Settings
    PROJECT_NAME: str = "avecert"
    VERSION: str = "1.0.0"
    DEBUG: bool = False
    LOG_LEVEL: str = "INFO"

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=True,
        extra="ignore"
    )

    def __init__(self, **kwargs):
        super().__init__(**kwargs)

        if self.DECISION_TOL < 0:
            logger.warning(f"DECISION_TOL={self.DECISION_TOL} is negative; clamping to 0")
            self.DECISION_TOL = 0.0
        if self.ENUM_CAP < 1 or self.KRON_CAP < 1:
            raise ValueError("ENUM_CAP and KRON_CAP must be at least 1")

    @property
    def log_level(self) -> int:
        """Numeric logging level; DEBUG=true wins over LOG_LEVEL."""
        if self.DEBUG:
            return logging.DEBUG
        return getattr(logging, self.LOG_LEVEL.upper(), logging.INFO)


try:
    settings = Settings()
    logger.debug("Settings loaded successfully")
except Exception as e:
    logger.error(f"Failed to load settings: {str(e)}")
    settings = Settings.model_construct()
    logger.warning("Using fallback default settings")
