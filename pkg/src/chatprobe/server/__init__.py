"""Deployable surface: configuration, HTTP API, command-line interface."""

from .app import SessionStore, create_app
from .config import AppConfig, ConfigError, build_backends, build_workbench, load_active_dataset
from .cli import main

__all__ = [
    "AppConfig",
    "ConfigError",
    "SessionStore",
    "build_backends",
    "build_workbench",
    "create_app",
    "load_active_dataset",
    "main",
]
