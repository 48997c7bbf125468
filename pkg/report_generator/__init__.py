"""Report Generator module"""
from .architecture_report import ArchitectureReport
from .metrics_report import MetricsReport

__all__ = ['ArchitectureReport', 'MetricsReport']
