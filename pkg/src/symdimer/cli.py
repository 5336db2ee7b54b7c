"""Console entry point for the symdimer command."""

from .cli_io import main

__all__ = ["main"]
