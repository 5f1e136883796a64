#------------------------------------------------------------------------------
# Module:       config.py
# Purpose:      Environment profiles (config/<env>.yml) plus TOML overrides
#------------------------------------------------------------------------------
import logging
import os
from typing import Any, Optional

import toml
import yaml
from dotenv import load_dotenv

logger = logging.getLogger(__name__)

BASE_DIR = os.path.abspath(os.path.join(os.path.dirname(__file__), ".."))  # project root
CONFIG_DIR = os.path.join(BASE_DIR, "config")
ENV_VARIABLE = "TASKSYN_ENV"
DEFAULT_ENV = "dev"


class ConfigError(ValueError):
    """Missing or unreadable configuration file."""


def resolve_env(cli_env: Optional[str] = None) -> str:
    """
    Pick the active profile name.

    Args:
        cli_env: value of --env, takes precedence when given

    Returns:
        --env, else $TASKSYN_ENV (a .env file is honoured), else "dev"
    """
    if cli_env:
        return cli_env.lower()
    load_dotenv(".env")
    return (os.getenv(ENV_VARIABLE) or DEFAULT_ENV).lower()


def deep_merge(base: dict, override: dict, path: str = "") -> dict:
    """Merge ``override`` into a copy of ``base``; keys unknown to ``base`` are ignored."""
    merged = dict(base)
    for key, value in override.items():
        dotted = f"{path}{key}"
        if key not in base:
            logger.warning(f"Ignoring unknown config key: {dotted}")
            continue
        if isinstance(base[key], dict) and isinstance(value, dict):
            merged[key] = deep_merge(base[key], value, f"{dotted}.")
        else:
            merged[key] = value
    return merged


def load_config(env_name: str, override_path: Optional[str] = None, config_dir: str = CONFIG_DIR) -> dict[str, Any]:
    """Load config/<env_name>.yml and merge an optional TOML override over it.

    Raises:
        ConfigError: profile or override file missing or unparsable.
    """
    config_file = os.path.join(config_dir, f"{env_name}.yml")
    if not os.path.exists(config_file):
        raise ConfigError(f"Config profile not found: {config_file}")
    try:
        with open(config_file, "r", encoding="utf-8") as f:
            config = yaml.safe_load(f) or {}
    except yaml.YAMLError as e:
        raise ConfigError(f"Invalid YAML in {config_file}: {e}")

    if override_path:
        if not os.path.exists(override_path):
            raise ConfigError(f"Config override not found: {override_path}")
        try:
            override = toml.load(override_path)
        except toml.TomlDecodeError as e:
            raise ConfigError(f"Invalid TOML in {override_path}: {e}")
        config = deep_merge(config, override)

    logger.debug(f"Loaded {env_name} configuration from {config_file}")
    return config
