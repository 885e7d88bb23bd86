# src/core/__init__.py
"""Configuration, constants, errors and shared infrastructure"""
