"""Training module"""
from .class_weights import count_class_statistics, median_frequency_weights
from .optimizer import init_velocity, sgd_step
from .evaluation import predict_labels, confusion_matrix, metrics_from_confusion, evaluate
from .trainer import train, checkpoint_name

__all__ = [
    'count_class_statistics', 'median_frequency_weights', 'init_velocity', 'sgd_step',
    'predict_labels', 'confusion_matrix', 'metrics_from_confusion', 'evaluate',
    'train', 'checkpoint_name'
]
