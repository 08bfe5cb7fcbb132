"""Access to configuration files bundled with the package."""

from __future__ import annotations

from importlib import resources
from pathlib import Path


def bundled_config_path(name: str) -> Path:
    """Filesystem path of a bundled data file (e.g. demo_discordance.yaml)."""
    path = resources.files("vantage").joinpath("data", name)
    return Path(str(path))


def demo_config_path() -> Path:
    return bundled_config_path("demo_discordance.yaml")


def reference_config_path() -> Path:
    return bundled_config_path("reference.yaml")
