# src/domain/__init__.py
"""Domain models and business rules"""