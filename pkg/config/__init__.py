"""Configuration module"""
from .settings import *

__all__ = [
    'BASE_DIR', 'CONFIG_DIR', 'OUTPUT_DIR', 'DATASET_DIR', 'PALETTE_PATH',
    'NUM_CLASSES', 'INPUT_CHANNELS', 'INPUT_HEIGHT', 'INPUT_WIDTH',
    'DROPOUT_RATE', 'IGNORE_ID', 'SEED',
    'LEARNING_RATE', 'MOMENTUM', 'WEIGHT_DECAY', 'BATCH_SIZE', 'MAX_ITERATIONS',
    'LR_DROP_FACTOR', 'LR_DROP_EVERY', 'CHECKPOINT_EVERY', 'LOG_EVERY',
    'CAMVID_PALETTE', 'REFERENCE_LAYER_TABLE', 'REFERENCE_TOTAL_PARAMETERS',
    'DEVIATION_NOTES', 'setup_logging'
]
