# src/domain/services/__init__.py
"""Domain services"""