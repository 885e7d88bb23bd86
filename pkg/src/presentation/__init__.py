# src/presentation/__init__.py
"""Presentation layer - command-line interface"""
