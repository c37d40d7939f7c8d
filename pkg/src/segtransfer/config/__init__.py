"""Configuration package for segtransfer."""

from segtransfer.config.settings import Settings

__all__ = ["Settings"]
