"""Singularity charts for movies of singular fibrations, and the ribbon-disk fiber pipeline."""

__version__ = "0.1.0"
