import logging
import os
from functools import lru_cache
from pathlib import Path

import toml
from pydantic import BaseModel, Field
from rich.logging import RichHandler

DEFAULT_SETTINGS_PATH = Path(__file__).resolve().parent.parent / "config" / "settings.toml"


class Settings(BaseModel):
    seed: int = 20240601
    delta_samples: int = 80
    bqf_samples: int = 150
    w_samples: int = 24
    fresh_samples: int = 40
    rational_points: int = Field(default=3, ge=1)
    extension_degree: int = 16
    log_level: str = "WARNING"
    cross_pivot_check: bool = False
    retry_attempts: int = Field(default=200, ge=1)


@lru_cache
def load_settings(path=None):
    """Read settings from TOML; `KUMMER_SETTINGS` overrides the default path."""
    path = Path(path or os.environ.get("KUMMER_SETTINGS", DEFAULT_SETTINGS_PATH))
    if not path.exists():
        return Settings()
    data = toml.load(path)
    return Settings(**data.get("kummer", data))


def setup_logging(level=None):
    level = level or load_settings().log_level
    logging.basicConfig(
        level=level.upper(),
        format="%(message)s",
        datefmt="[%X]",
        handlers=[RichHandler(rich_tracebacks=True, show_path=False)],
        force=True,
    )
    return logging.getLogger("kummer")
