# src/infrastructure/__init__.py
"""Infrastructure layer - external systems and implementations"""