"""Cryptographic asset discovery and misuse detection for Java sources."""

__version__ = "0.1.0"
