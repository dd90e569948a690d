"""Compiler from quantum circuits to fusion-network schedules on a
photonic measurement-based architecture built from 3-qubit resource states."""

__version__ = "0.1.0"
