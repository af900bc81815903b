import logging
import time
from functools import wraps
from typing import Callable

logger = logging.getLogger(__name__)


class Stopwatch:
    """Wall-clock timer for ``with`` blocks; ``elapsed`` is read after exit or live."""

    def __init__(self):
        self._start = None
        self._stop = None

    def __enter__(self):
        self._start = time.perf_counter()
        self._stop = None
        return self

    def __exit__(self, *exc):
        self._stop = time.perf_counter()

    @property
    def elapsed(self) -> float:
        if self._start is None:
            return 0.0
        end = self._stop if self._stop is not None else time.perf_counter()
        return end - self._start


def timed(func: Callable):
    @wraps(func)
    def wrapper(*args, **kwargs):
        with Stopwatch() as sw:
            result = func(*args, **kwargs)
        func_name = getattr(func, "__name__", repr(func))
        logger.debug("%s finished in %.4f s", func_name, sw.elapsed)
        return result

    return wrapper
