import logging
import os
from logging.handlers import RotatingFileHandler
from typing import Any, Dict, Optional


class PlannerLogger:
    """日志管理器"""

    _instance: Optional['PlannerLogger'] = None
    _loggers: dict = {}
    # 未调用configure前只输出到控制台
    _settings: Dict[str, Any] = {
        'level': 'INFO',
        'file': None,
        'max_size_mb': 10,
        'backup_count': 5,
    }

    def __new__(cls) -> 'PlannerLogger':
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def configure(
        self,
        level: str = "INFO",
        log_file: Optional[str] = None,
        max_size_mb: int = 10,
        backup_count: int = 5
    ) -> None:
        """更新日志设置并应用到已有日志器"""
        self._settings = {
            'level': level,
            'file': log_file or None,
            'max_size_mb': max_size_mb,
            'backup_count': backup_count,
        }
        for name in list(self._loggers):
            del self._loggers[name]
            self.setup_logger(name)

    def setup_logger(self, name: str) -> logging.Logger:
        """配置日志器"""

        if name in self._loggers:
            return self._loggers[name]

        level = getattr(logging, str(self._settings['level']).upper(), logging.INFO)
        log_file = self._settings['file']

        logger = logging.getLogger(f"sciltl.{name}")
        logger.setLevel(level)
        logger.propagate = False

        # 清除已有处理器
        for handler in list(logger.handlers):
            handler.close()
        logger.handlers.clear()

        formatter = logging.Formatter(
            '%(asctime)s - %(name)s - %(levelname)s - %(message)s',
            datefmt='%Y-%m-%d %H:%M:%S'
        )

        if log_file:
            # 确保日志目录存在
            log_dir = os.path.dirname(log_file)
            if log_dir and not os.path.exists(log_dir):
                os.makedirs(log_dir, exist_ok=True)

            file_handler = RotatingFileHandler(
                log_file,
                maxBytes=int(self._settings['max_size_mb']) * 1024 * 1024,
                backupCount=int(self._settings['backup_count']),
                encoding='utf-8'
            )
            file_handler.setLevel(level)
            file_handler.setFormatter(formatter)
            logger.addHandler(file_handler)

        # 控制台处理器
        console_handler = logging.StreamHandler()
        console_handler.setLevel(level)
        console_handler.setFormatter(formatter)
        logger.addHandler(console_handler)

        self._loggers[name] = logger
        return logger

    def get_logger(self, name: str) -> logging.Logger:
        """获取日志器"""
        if name not in self._loggers:
            return self.setup_logger(name)
        return self._loggers[name]


def get_logger(name: str) -> logging.Logger:
    """便捷函数：获取日志器"""
    return PlannerLogger().get_logger(name)


def configure_logging(settings: Dict[str, Any], verbose: bool = False) -> None:
    """按配置文件的logging段设置日志"""
    PlannerLogger().configure(
        level='DEBUG' if verbose else settings.get('level', 'INFO'),
        log_file=settings.get('file'),
        max_size_mb=settings.get('max_size_mb', 10),
        backup_count=settings.get('backup_count', 5),
    )
