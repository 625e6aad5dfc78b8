"""Command-line interface."""

from .commands import main, build_parser

__all__ = ['main', 'build_parser']
