"""
Shared utilities
"""

from .logging import log_duration, setup_logging

__all__ = ['log_duration', 'setup_logging']
