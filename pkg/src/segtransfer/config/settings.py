"""Process-level settings read from the environment."""

from typing import Optional

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Application settings.

    Every field can be overridden with a ``SEGTRANSFER_``-prefixed environment
    variable or an entry in a ``.env`` file.
    """

    model_config = SettingsConfigDict(
        env_prefix="SEGTRANSFER_",
        env_file=".env",
        case_sensitive=False,
        extra="ignore",
    )

    # Overrides ExperimentConfig.workers when set
    WORKERS: Optional[int] = Field(default=None, ge=1)

    LOG_LEVEL: str = "INFO"
    LOG_FILE: Optional[str] = None
    LOG_MAX_BYTES: int = Field(default=10 * 1024 * 1024, ge=1)
    LOG_BACKUP_COUNT: int = Field(default=5, ge=0)
