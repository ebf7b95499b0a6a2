"""
Run Logging Helpers
Root logging setup and start/duration logging around solver runs
"""

import logging
import time
from contextlib import contextmanager
from typing import Dict, Iterator, Optional, Union

logger = logging.getLogger(__name__)

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'


def setup_logging(level: Union[str, int, None] = None):
    """Configure the root handler once; level given by name or number"""
    if level is None:
        level = logging.WARNING
    if isinstance(level, str):
        resolved = logging.getLevelName(level.upper())
        if not isinstance(resolved, int):
            raise ValueError(f"Unknown log level: {level}")
        level = resolved

    logging.basicConfig(level=level, format=LOG_FORMAT)
    logging.getLogger().setLevel(level)
    logger.debug(f"Logging configured at {logging.getLevelName(level)}")


@contextmanager
def log_duration(log: logging.Logger, label: str, timing: Optional[Dict[str, float]] = None) -> Iterator[None]:
    """
    Log start and duration of a block

    Args:
        log: Logger to write to
        label: Text identifying the block
        timing: Optional dict receiving 'seconds' on exit
    """
    start_time = time.perf_counter()
    log.info(f"{label} - Started")
    try:
        yield
    finally:
        elapsed = time.perf_counter() - start_time
        if timing is not None:
            timing['seconds'] = elapsed
        log.info(f"{label} - Duration: {elapsed:.3f}s")
