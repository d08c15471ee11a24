"""Multilingual PII annotation quality pipeline."""

__version__ = "0.1.0"
