"""Synchronization and tracking control of spacecraft formations."""
__version__ = "0.1.0"
