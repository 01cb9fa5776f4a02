"""Collision-free multi-channel time-slot scheduling for dependent periodic tasks."""

__version__ = "0.1.0"
