# src/infrastructure/exporters/__init__.py
"""CSV tables and key-value reports"""
