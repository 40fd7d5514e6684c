"""Microeconomic model of mobility creation under budget and policy constraints."""

__version__ = "0.1.0"
