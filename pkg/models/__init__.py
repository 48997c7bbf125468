"""Models module"""
from .op_types import ConvSpec, PoolRecord, LossOutput
from .fire_specs import FireSpec, DFireSpec
from .sample import Sample, Palette, PaletteEntry
from .sgd_config import SgdConfig
from .metrics import Metrics
from .train_log import TrainLog, TrainLogEntry
from .run_config import RunConfig

__all__ = [
    'ConvSpec', 'PoolRecord', 'LossOutput', 'FireSpec', 'DFireSpec',
    'Sample', 'Palette', 'PaletteEntry', 'SgdConfig', 'Metrics',
    'TrainLog', 'TrainLogEntry', 'RunConfig'
]
