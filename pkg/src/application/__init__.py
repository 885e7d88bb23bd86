# src/application/__init__.py
"""Application services"""
