import logging
import sys
from typing import Any, MutableMapping, Optional, Tuple

from pythonjsonlogger import jsonlogger


def setup_logger(name: str = "dot", log_level: Optional[str] = None) -> logging.Logger:
    """
    Setup structured JSON logging
    """
    logger = logging.getLogger(name)

    level = getattr(logging, log_level.upper()) if log_level else logging.INFO
    logger.setLevel(level)

    # Re-running setup (one CLI command after another in tests) must not stack handlers
    if not any(getattr(handler, "_dot_handler", False) for handler in logger.handlers):
        formatter = jsonlogger.JsonFormatter(
            fmt="%(asctime)s %(name)s %(levelname)s %(message)s",
            datefmt="%Y-%m-%d %H:%M:%S",
        )
        console_handler = logging.StreamHandler(sys.stdout)
        console_handler.setFormatter(formatter)
        console_handler._dot_handler = True
        logger.addHandler(console_handler)

    return logger


def get_logger(module: str) -> logging.Logger:
    """Child of the workbench logger for a module"""
    return logging.getLogger(f"dot.{module.rsplit('.', 1)[-1]}")


# Create default logger
logger = setup_logger()


class RunLoggerAdapter(logging.LoggerAdapter):
    """
    Logger adapter attaching run context (stage, run id) to every record
    """

    def process(self, msg: Any, kwargs: MutableMapping[str, Any]) -> Tuple[Any, MutableMapping[str, Any]]:
        context = {key: value for key, value in (self.extra or {}).items() if value is not None}
        kwargs["extra"] = {**context, **kwargs.get("extra", {})}
        return msg, kwargs
