"""
Monitoring and logging for cykit.

Logs are JSON lines from structlog on stderr (and CYKIT_LOG_FILE when set).
Heavy operations are wrapped with ``track_performance``; their timers and
outcome meters live in one pyformance registry that ``--stats`` summarizes.
"""

import functools
import logging
import time
from contextlib import contextmanager
from datetime import datetime, timezone
from fractions import Fraction

import structlog
from pyformance import MetricsRegistry

from cykit_config import CYKIT_LOG_FILE, LOG_LEVEL

_handlers = [logging.StreamHandler()]
if CYKIT_LOG_FILE:
    _handlers.append(logging.FileHandler(CYKIT_LOG_FILE))

logging.basicConfig(
    level=getattr(logging, LOG_LEVEL.upper(), logging.INFO),
    format='%(message)s',
    handlers=_handlers,
)


def _exact_scalars(_, __, event_dict):
    """Render Fractions and residues as strings so JSON keeps them exact."""
    for key, value in event_dict.items():
        if isinstance(value, Fraction) or type(value).__name__ == 'Residue':
            event_dict[key] = str(value)
    return event_dict


structlog.configure(
    processors=[
        structlog.stdlib.filter_by_level,
        structlog.stdlib.add_logger_name,
        structlog.stdlib.add_log_level,
        structlog.processors.TimeStamper(fmt="iso", utc=True),
        _exact_scalars,
        structlog.processors.format_exc_info,
        structlog.processors.JSONRenderer(sort_keys=True),
    ],
    context_class=dict,
    logger_factory=structlog.stdlib.LoggerFactory(),
    wrapper_class=structlog.stdlib.BoundLogger,
    cache_logger_on_first_use=True,
)

logger = structlog.get_logger("cykit")

metrics = MetricsRegistry()


def set_log_level(level):
    """
    Change the level of the root logger at runtime.

    Args:
        level: Level name such as 'DEBUG' or 'WARNING'
    """
    logging.getLogger().setLevel(getattr(logging, level.upper(), logging.INFO))


def _outcome(error):
    # exit code 3 is an inconclusive window, anything else a refusal or failure
    return 'inconclusive' if getattr(error, 'exit_code', None) == 3 else 'failure'


@contextmanager
def timed(name, **context):
    """Time a block under ``name`` and count its outcome."""
    started = time.perf_counter()
    with metrics.timer(name).time():
        try:
            yield
        except Exception as e:
            metrics.meter(f"{name}.{_outcome(e)}").mark()
            logger.info("Operation stopped", operation=name, error=type(e).__name__,
                        elapsed_ms=round((time.perf_counter() - started) * 1000, 2), **context)
            raise
    metrics.meter(f"{name}.success").mark()
    logger.debug("Operation finished", operation=name,
                 elapsed_ms=round((time.perf_counter() - started) * 1000, 2), **context)


class PerformanceMonitor:
    """Timers for the engine's heavy operations."""

    @staticmethod
    def track_performance(func):
        """
        Decorator timing every call of ``func`` as ``module.name``.

        Args:
            func: The operation to time

        Returns:
            The wrapped function
        """
        name = f"{func.__module__}.{func.__name__}"

        @functools.wraps(func)
        def wrapper(*args, **kwargs):
            with timed(name):
                return func(*args, **kwargs)

        return wrapper


class ErrorTracker:
    """Track errors surfaced to the command line."""

    @staticmethod
    def log_error(error, context=None):
        """
        Log an error with its attributes and the exit code it maps to.

        Args:
            error: The exception, or a plain message
            context: Extra fields such as the command name
        """
        fields = {
            'timestamp': datetime.now(timezone.utc).isoformat(),
            'error_type': type(error).__name__ if isinstance(error, Exception) else 'string',
            'error_message': str(error),
        }
        if isinstance(error, Exception):
            fields['exit_code'] = getattr(error, 'exit_code', None)
            fields.update({k: v for k, v in vars(error).items() if isinstance(v, (str, int)) and k not in fields})
        fields.update(context or {})

        logger.error("Command failed", **fields)
        metrics.meter(f"errors.{fields['error_type']}").mark()


def metrics_snapshot():
    """
    Summarize the timers recorded so far.

    Returns:
        dict: metric name -> {'count', 'mean_ms'}
    """
    summary = {}
    for name, values in sorted(metrics.dump_metrics().items()):
        if 'count' in values and 'avg' in values:
            summary[name] = {
                'count': values['count'],
                'mean_ms': round(values['avg'] * 1000, 3),
            }
    return summary


track_performance = PerformanceMonitor.track_performance
log_error = ErrorTracker.log_error
