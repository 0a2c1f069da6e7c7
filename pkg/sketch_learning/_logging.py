"""
Package logging for ``sketch_learning``.

All modules log under the ``sketch_learning`` root through
:meth:`SketchLearningLogger.get`. The root carries one stream handler and does
not propagate unless asked, so a host application sees sketching and solver
progress only when it opts in. The level comes from ``LOG_LEVEL`` unless
:meth:`SketchLearningLogger.configure` or the CLI's ``-v`` / ``-q`` set it.

Messages read ``"<area>.<event>: key=value ..."``; :meth:`SketchLearningLogger.timed`
appends ``in <ms> ms`` for operations worth timing (sketch passes, solver fits).
"""

import logging
import os
import time
from collections.abc import Iterator
from contextlib import contextmanager
from typing import Any, Optional, Union

_ROOT = "sketch_learning"
_FORMAT = "%(asctime)s %(levelname)-7s %(name)s: %(message)s"
_DATEFMT = "%H:%M:%S"

# set on the handler we install, so configure() can find it again
_HANDLER_MARKER = "_sketch_learning_handler"

Level = Union[str, int]


def _resolve_level(level: Optional[Level]) -> Level:
    resolved = level if level is not None else (os.getenv("LOG_LEVEL") or "INFO")
    return resolved.upper() if isinstance(resolved, str) else resolved


def _format_fields(fields: dict[str, Any]) -> str:
    parts = []
    for key, value in fields.items():
        parts.append(f"{key}={value:.6g}" if isinstance(value, float) else f"{key}={value}")
    return " ".join(parts)


class SketchLearningLogger:
    """
    Namespace for the package's logging helpers.

    Modules do ``logger = SketchLearningLogger.get(__name__)``; applications
    call :meth:`configure` once, or leave it to the first :meth:`get`.
    """

    _configured = False

    @classmethod
    def get(cls, name: str) -> logging.Logger:
        if not cls._configured:
            cls.configure()
        return logging.getLogger(name)

    @classmethod
    def configure(
        cls,
        level: Optional[Level] = None,
        format: Optional[str] = None,
        propagate: bool = False,
    ) -> None:
        """
        Set the package level, handler format and propagation.

        Safe to call repeatedly: the package handler is installed once and
        only its formatter is replaced on later calls.
        """
        root = logging.getLogger(_ROOT)
        root.setLevel(_resolve_level(level))
        root.propagate = propagate

        formatter = logging.Formatter(format or _FORMAT, datefmt=_DATEFMT)
        handler = next((h for h in root.handlers if getattr(h, _HANDLER_MARKER, False)), None)
        if handler is None:
            handler = logging.StreamHandler()
            setattr(handler, _HANDLER_MARKER, True)
            root.addHandler(handler)
        handler.setFormatter(formatter)
        cls._configured = True

    @classmethod
    def from_flags(cls, verbose: bool = False, quiet: bool = False) -> None:
        """Map ``-v`` to DEBUG and ``-q`` to WARNING; with neither, leave the current level alone."""
        if verbose and quiet:
            raise ValueError("verbose and quiet are mutually exclusive")
        if verbose:
            cls.configure(level="DEBUG")
        elif quiet:
            cls.configure(level="WARNING")

    @staticmethod
    @contextmanager
    def timed(logger: logging.Logger, event: str, **fields: Any) -> Iterator[dict[str, Any]]:
        """
        Log ``"<event>: key=value ... in N ms"`` at INFO when the block exits normally.

        The yielded dict starts as ``fields``; the block may add results
        (a cost, a row count) before the line is written.
        """
        record = dict(fields)
        t0 = time.perf_counter()
        yield record
        elapsed_ms = (time.perf_counter() - t0) * 1000
        logger.info("%s: %s in %.0f ms", event, _format_fields(record), elapsed_ms)
