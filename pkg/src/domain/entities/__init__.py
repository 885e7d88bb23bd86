# src/domain/entities/__init__.py
"""Domain entities"""
from .evolution import DephasingConvention, EvolutionSettings, IntegrationMethod, Trajectory
from .measurement import MeasuredPoint, SweepDataset
from .readout_model import ReadoutModel
from .spectrum_model import BimodalModel, DriftKind, DriftProcess, GaussianPeak
from .spin_system import NuclearState, SpinSystemParams
from .sweep_protocol import SweepDirection, SweepProtocol

__all__ = [
    'BimodalModel',
    'DephasingConvention',
    'DriftKind',
    'DriftProcess',
    'EvolutionSettings',
    'GaussianPeak',
    'IntegrationMethod',
    'MeasuredPoint',
    'NuclearState',
    'ReadoutModel',
    'SpinSystemParams',
    'SweepDataset',
    'SweepDirection',
    'SweepProtocol',
    'Trajectory'
]
