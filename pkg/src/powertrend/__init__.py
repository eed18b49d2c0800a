"""Wilder's Volatility System with signal/noise power-ratio trend gating."""

__version__ = "0.1.0"

from ._accel import backend_name  # noqa: E402
from .errors import DataError, DegenerateError, PowerTrendError, WarmupError  # noqa: E402

__all__ = [
    "DataError",
    "DegenerateError",
    "PowerTrendError",
    "WarmupError",
    "backend_name",
]
