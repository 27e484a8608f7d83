"""
Logging, run metrics and the error hierarchy shared by every kgstab module
"""
from .errors import KgstabError
from .logging_config import get_logger, metrics_tracker, setup_logging

__all__ = ['KgstabError', 'get_logger', 'metrics_tracker', 'setup_logging']
