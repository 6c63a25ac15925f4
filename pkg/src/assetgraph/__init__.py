"""Embedded property graph engine and tiered question answering for asset operations."""

__version__ = "0.1.0"
