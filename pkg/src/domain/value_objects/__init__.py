# src/domain/value_objects/__init__.py
"""Value objects"""
from .density_matrix import DensityMatrix2
from .phys_constants import PhysConstants
from .power_setting import PowerSetting

__all__ = [
    'DensityMatrix2',
    'PhysConstants',
    'PowerSetting'
]
