"""
Configuration for cykit

Environment-driven settings for the exact-arithmetic engine. Values are read
once at import for module-level constants and again on demand through
``get_settings`` so tests can patch the environment.
"""

import os
from dataclasses import dataclass
from typing import Optional, Tuple

from dotenv import load_dotenv

load_dotenv()

CYKIT_THREADS = int(os.environ.get('CYKIT_THREADS', 1))
LOG_LEVEL = os.environ.get('LOG_LEVEL', 'INFO')
CYKIT_LOG_FILE = os.environ.get('CYKIT_LOG_FILE')
CYKIT_DEFAULT_WINDOW = os.environ.get('CYKIT_DEFAULT_WINDOW', '-4:1')
CYKIT_WEIGHT_WINDOW = os.environ.get('CYKIT_WEIGHT_WINDOW', '-3:3')
CYKIT_U_ORDER = int(os.environ.get('CYKIT_U_ORDER', 3))
CYKIT_SUPPORT_RADIUS = int(os.environ.get('CYKIT_SUPPORT_RADIUS', 2))
CYKIT_CACHE_SIZE = int(os.environ.get('CYKIT_CACHE_SIZE', 64))
CYKIT_PRIME = os.environ.get('CYKIT_PRIME')


def parse_window(text: str) -> Tuple[int, int]:
    """
    Parse a window of the form ``lo:hi``.

    Args:
        text: Window text, e.g. ``-4:1``

    Returns:
        tuple: (lo, hi) with lo <= hi

    Raises:
        ValueError: If the text is malformed or the interval is empty
    """
    parts = text.split(':')
    if len(parts) != 2:
        raise ValueError(f"Window must look like lo:hi, got {text!r}")
    lo, hi = int(parts[0]), int(parts[1])
    if lo > hi:
        raise ValueError(f"Empty window {text!r}")
    return lo, hi


@dataclass(frozen=True)
class Settings:
    """Snapshot of the environment configuration."""
    threads: int
    log_level: str
    log_file: Optional[str]
    degree_window: Tuple[int, int]
    weight_window: Tuple[int, int]
    u_order: int
    support_radius: int
    cache_size: int
    prime: Optional[int]


def get_settings() -> Settings:
    """
    Read the current environment into a Settings object.

    Returns:
        Settings: Current configuration
    """
    prime = os.environ.get('CYKIT_PRIME')
    return Settings(
        threads=max(1, int(os.environ.get('CYKIT_THREADS', 1))),
        log_level=os.environ.get('LOG_LEVEL', 'INFO'),
        log_file=os.environ.get('CYKIT_LOG_FILE'),
        degree_window=parse_window(os.environ.get('CYKIT_DEFAULT_WINDOW', '-4:1')),
        weight_window=parse_window(os.environ.get('CYKIT_WEIGHT_WINDOW', '-3:3')),
        u_order=int(os.environ.get('CYKIT_U_ORDER', 3)),
        support_radius=int(os.environ.get('CYKIT_SUPPORT_RADIUS', 2)),
        cache_size=int(os.environ.get('CYKIT_CACHE_SIZE', 64)),
        prime=int(prime) if prime else None,
    )
