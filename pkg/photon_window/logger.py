"""Copyright (c) 2023 Genome Research Ltd.

This source code is licensed under the MIT license found in the
LICENSE file in the root directory of this source tree.
"""

import importlib
import logging

from box import Box

from .app import app

ROOT = "photon_window"


def init_logger() -> logging.Logger:
    """Initialize the package logger from the logging settings.

    Returns:
        Logger: The configured package root logger.
    """
    settings = Box(app.settings.dict())
    logger = logging.getLogger(ROOT)
    if getattr(logger, "_photon_window_configured", False):
        return logger
    args = settings.logging.formatters.default.to_dict()
    formatter_class = args.pop("class")
    module, _, cls = formatter_class.rpartition('.')
    formatter = getattr(importlib.import_module(module), cls)(
        fmt=args.get("format"), datefmt=args.get("datefmt")
    )
    handlers: list[logging.Handler] = [logging.StreamHandler()]
    if settings.logging.filename:
        handlers.append(
            logging.FileHandler(filename=str(settings.logging.filename))
        )
    for handler in handlers:
        handler.setFormatter(formatter)
        logger.addHandler(handler)
    logger.setLevel(settings.logging.level)
    setattr(logger, "_photon_window_configured", True)
    return logger


def get_logger(name: str) -> logging.Logger:
    """Get a logger below the package root logger.

    Args:
        name: Module name, usually `__name__`.

    Returns:
        Logger: A python Logger object.
    """
    init_logger()
    return logging.getLogger(name)


class LogMixin:
    """Log mixin."""

    @property
    def logger(self) -> logging.Logger:
        """Get class-specific logger.

        Returns:
            Logger: A python Logger object.
        """
        cls = type(self)
        return get_logger(f"{cls.__module__}.{cls.__name__}")
