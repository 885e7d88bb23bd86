# src/infrastructure/importers/__init__.py
"""Import modules"""
from .base import BaseImporter, ImportResult
from .spectrum_csv import SpectrumCSVImporter
from .sweep_csv import SweepCSVImporter
from .factory import ImporterFactory

__all__ = [
    'BaseImporter',
    'ImportResult',
    'SpectrumCSVImporter',
    'SweepCSVImporter',
    'ImporterFactory'
]
