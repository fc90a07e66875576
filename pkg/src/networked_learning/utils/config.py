"""Configuration management."""

import json
import logging
import os
from pathlib import Path
from typing import Any, Dict, Optional

logger = logging.getLogger(__name__)

# Environment variable -> configuration key
ENV_OVERRIDES = {
    "NETWORKED_LEARNING_ALPHA_CAP": "alpha_cap",
    "NETWORKED_LEARNING_CHI_CAP": "chi_cap",
    "NETWORKED_LEARNING_ENUMERATION_CAP": "enumeration_cap",
    "NETWORKED_LEARNING_WORKERS": "workers",
}


class Config:
    """Application configuration manager.

    Values come from three layers, later layers winning: built-in defaults,
    an optional JSON settings file, and ``NETWORKED_LEARNING_*`` environment
    variables.
    """

    def __init__(self, config_file: Optional[Path] = None, use_env: bool = True):
        """Initialize configuration manager.

        Args:
            config_file: Path to configuration file
            use_env: Whether environment overrides are applied
        """
        self.config_file = Path(config_file) if config_file else None
        self._config: Dict[str, Any] = self._get_default_config()
        self._load_config()
        if use_env:
            self._apply_env()

    def _load_config(self) -> None:
        """Load configuration from file."""
        if self.config_file is None or not self.config_file.exists():
            return
        try:
            with open(self.config_file, "r", encoding="utf-8") as f:
                self._config.update(json.load(f))
        except (json.JSONDecodeError, IOError) as e:
            logger.warning(f"Ignoring unreadable config file {self.config_file}: {e}")

    def _apply_env(self) -> None:
        """Apply integer overrides from the environment."""
        for variable, key in ENV_OVERRIDES.items():
            raw = os.getenv(variable)
            if raw is None:
                continue
            try:
                self._config[key] = int(raw)
            except ValueError:
                logger.warning(f"Ignoring non-integer {variable}={raw!r}")

    def _get_default_config(self) -> Dict[str, Any]:
        """Get default configuration."""
        return {
            "alpha_cap": 24,
            "chi_cap": 16,
            "enumeration_cap": 10_000_000,
            "workers": 4,
            "trial_block": 4096,
            "max_simplex_pivots": 100_000,
        }

    def get(self, key: str, default: Any = None) -> Any:
        """Get configuration value.

        Args:
            key: Configuration key
            default: Default value if key not found

        Returns:
            Configuration value
        """
        return self._config.get(key, default)

    def set(self, key: str, value: Any) -> None:
        """Set configuration value.

        Args:
            key: Configuration key
            value: Configuration value
        """
        self._config[key] = value

    def save(self) -> None:
        """Save configuration to file."""
        if self.config_file is None:
            raise ValueError("No config file to save to")
        with open(self.config_file, "w", encoding="utf-8") as f:
            json.dump(self._config, f, indent=2)


_default: Optional[Config] = None


def get_config() -> Config:
    """Return the process-wide configuration, creating it on first use."""
    global _default
    if _default is None:
        _default = Config()
    return _default


def set_config(config: Optional[Config]) -> None:
    """Replace the process-wide configuration (None resets to defaults on next use)."""
    global _default
    _default = config
