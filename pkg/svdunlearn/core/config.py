from pathlib import Path

from pydantic_settings import BaseSettings, SettingsConfigDict

BASE_DIR = Path(__file__).resolve().parent.parent.parent


class Settings(BaseSettings):
    # Output settings
    OUTPUT_DIR: str = "outputs"
    CHECKPOINT_FORMAT_VERSION: int = 1

    # Logging settings
    LOG_LEVEL: str = "INFO"

    # Reproducibility settings
    DEFAULT_SEED: int = 0

    # Representation collection
    REPRESENTATION_BATCH_SIZE: int = 512

    model_config = SettingsConfigDict(
        env_prefix="SVDUNLEARN_",
        env_file=str(BASE_DIR / ".env"),
        env_file_encoding="utf-8",
        extra="ignore",
    )


settings = Settings()
