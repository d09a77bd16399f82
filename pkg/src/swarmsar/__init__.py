"""Deterministic UAV-swarm search-and-rescue simulator and mission planner."""

__version__ = "0.1.0"

SCHEMA_VERSION = 1
