from functools import lru_cache
from typing import Optional
from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Simulator settings with environment variable support (prefix HHL_)"""

    # Basic App Settings
    APP_NAME: str = "HHL Statevector Simulator"
    APP_VERSION: str = "1.0.0"
    ENVIRONMENT: str = Field(default="development", description="Environment: development, testing, production")

    # Logging Settings
    LOG_LEVEL: str = Field(default="WARNING", pattern="^(DEBUG|INFO|WARNING|ERROR|CRITICAL)$")
    LOG_FORMAT: str = Field(default="console", pattern="^(console|json)$", description="structlog renderer")
    LOG_FILE: Optional[str] = Field(default=None, description="Optional log file path")

    # Numerical tolerances
    UNITARITY_TOLERANCE: float = Field(default=1e-12, gt=0, le=1e-6, description="max |M^dag M - I| entry")
    HERMITIAN_TOLERANCE: float = Field(default=1e-10, gt=0, le=1e-4, description="max |A - A^dag| entry")
    NORM_TOLERANCE: float = Field(default=1e-10, gt=0, le=1e-4, description="Allowed drift of the squared norm")
    IMPOSSIBLE_OUTCOME_TOLERANCE: float = Field(default=1e-14, gt=0, le=1e-6)
    ENCODING_TOLERANCE: float = Field(default=1e-9, gt=0, le=1e-3, description="Integrality of encoded eigenvalues")
    POPULATION_TOLERANCE: float = Field(default=1e-12, gt=0, le=1e-3, description="Mass above which a clock value is populated")
    DECOMPOSITION_TOLERANCE: float = Field(default=1e-9, gt=0, le=1e-3, description="Per-qubit ancilla weight residual")

    # Size guards
    MAX_QUBITS: int = Field(default=25, ge=3, le=30)
    MAX_FOURIER_QUBITS: int = Field(default=12, ge=1, le=16)

    # Sampling
    DEFAULT_SHOTS: int = Field(default=1024, ge=1)
    DEFAULT_SEED: int = Field(default=2024, ge=0)
    SAMPLER_ALGORITHM: str = Field(default="PCG64", description="numpy bit generator used for sampling")

    # Output formatting
    HUMAN_DECIMALS: int = Field(default=4, ge=1, le=12)
    CSV_SIGNIFICANT_DIGITS: int = Field(default=17, ge=6, le=17)
    BRAKET_THRESHOLD: float = Field(default=1e-9, gt=0, le=1e-2)

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        env_prefix="HHL_",
        case_sensitive=True,
        extra="ignore"
    )

    @field_validator('ENVIRONMENT')
    @classmethod
    def validate_environment(cls, v):
        if v not in ["development", "testing", "production"]:
            raise ValueError("ENVIRONMENT must be one of: development, testing, production")
        return v

    @field_validator('SAMPLER_ALGORITHM')
    @classmethod
    def validate_sampler(cls, v):
        # Only generators with a stable, documented stream are accepted
        if v not in ["PCG64", "PCG64DXSM", "Philox", "SFC64", "MT19937"]:
            raise ValueError("SAMPLER_ALGORITHM must name a numpy bit generator")
        return v


@lru_cache()
def get_settings() -> Settings:
    """Get cached settings instance"""
    return Settings()


def get_config_summary(settings: Settings) -> dict:
    """Get a summary of configuration for logging"""
    return {
        "app_name": settings.APP_NAME,
        "version": settings.APP_VERSION,
        "environment": settings.ENVIRONMENT,
        "log_level": settings.LOG_LEVEL,
        "max_qubits": settings.MAX_QUBITS,
        "unitarity_tolerance": settings.UNITARITY_TOLERANCE,
        "encoding_tolerance": settings.ENCODING_TOLERANCE,
        "sampler": settings.SAMPLER_ALGORITHM,
    }
