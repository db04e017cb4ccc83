"""
Process-level settings read from the environment.
Centralized configuration for logging and report output; run hyperparameters live in RunConfig.
"""
import logging
import os
from dataclasses import dataclass
from typing import Optional

from dotenv import load_dotenv

DEFAULT_LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


@dataclass
class Settings:
    """Environment-derived settings"""
    log_level: str = "INFO"
    log_format: str = DEFAULT_LOG_FORMAT
    report_suffix: str = ".report.json"

    def update_settings_from_env(self):
        """Update settings from environment variables"""
        self.log_level = os.getenv("CAPTIONING_LOG_LEVEL", self.log_level).upper()
        self.log_format = os.getenv("CAPTIONING_LOG_FORMAT", self.log_format)
        self.report_suffix = os.getenv("CAPTIONING_REPORT_SUFFIX", self.report_suffix)

    def numeric_log_level(self) -> int:
        level = logging.getLevelName(self.log_level)
        return level if isinstance(level, int) else logging.INFO

    def configure_logging(self):
        # stderr only; stdout is reserved for command output
        logging.basicConfig(level=self.numeric_log_level(), format=self.log_format)


# Global settings instance
_settings: Optional[Settings] = None


def get_settings() -> Settings:
    """Get or create global settings instance"""
    global _settings
    if _settings is None:
        load_dotenv()
        _settings = Settings()
        _settings.update_settings_from_env()
    return _settings


def reset_settings():
    """Drop the cached instance so the next get_settings() re-reads the environment"""
    global _settings
    _settings = None
