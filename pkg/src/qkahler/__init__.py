"""Exact verification of Kähler identities for bigraded differential calculi."""

__version__ = "0.1.0"
