# src/__init__.py
"""Adiabatic inversion toolkit - chirped-drive spin inversion simulator and parameter estimation"""

__version__ = "0.1.0"
__author__ = "Spin Qubit Group"
