"""Command-line and HTTP front ends."""

from .config import ProjectConfig, load_config

__all__ = ["ProjectConfig", "load_config"]
