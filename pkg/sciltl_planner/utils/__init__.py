"""工具模块"""

from .logger import PlannerLogger, configure_logging, get_logger
from .config_loader import ConfigLoader
from .errors import PlannerError

__all__ = [
    'PlannerLogger',
    'configure_logging',
    'get_logger',
    'ConfigLoader',
    'PlannerError',
]
