"""Utils module"""
from .exceptions import *

__all__ = [
    # exceptions
    'SqueezeSegError', 'ShapeError', 'SizingError', 'DataError', 'FormatError',
    'CheckpointError', 'ConfigError', 'NumericError',
]
