# src/application/services/__init__.py
"""Application services"""