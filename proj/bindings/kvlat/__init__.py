"""Throughput models and event simulation for SSD-based KV stores on
microsecond-latency memory."""

from kvlat._core import *  # noqa: F401,F403

__version__ = "0.1.0"
