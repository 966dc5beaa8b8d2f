from __future__ import annotations

from functools import lru_cache
from pathlib import Path

from pydantic_settings import BaseSettings, SettingsConfigDict


_PROJECT_ROOT = Path(__file__).resolve().parents[1]


class Settings(BaseSettings):
    LOG_LEVEL: str = "INFO"
    PROGRESS: bool = True
    DATA_DIR: str = str(_PROJECT_ROOT / "data")
    RUNS_DIR: str = str(_PROJECT_ROOT / "runs")
    DEFAULT_SEED: int = 0

    model_config = SettingsConfigDict(
        env_prefix="GSAN_",
        env_file=str(_PROJECT_ROOT / ".env"),
        extra="ignore",
    )


@lru_cache(maxsize=1)
def get_settings() -> Settings:
    return Settings()
