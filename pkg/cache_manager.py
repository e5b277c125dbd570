"""
Cache for compiled categories and mixed complexes.

Inputs are immutable, so entries never go stale: the cache is a bounded LRU
keyed by a digest of the canonical JSON form of the arguments. Concurrent
callers asking for the same key wait for one computation instead of
repeating it.
"""

import functools
import hashlib
import json
import threading
from collections import Counter, OrderedDict
from typing import Any, Callable, Dict, Optional

from cykit_config import CYKIT_CACHE_SIZE
from monitoring import logger, metrics

_MISSING = object()


def digest(payload: Any) -> str:
    """
    Stable digest of a JSON-serializable payload.

    Args:
        payload: Any structure accepted by json.dumps (sets must be sorted first)

    Returns:
        str: hex digest
    """
    text = json.dumps(payload, sort_keys=True, separators=(',', ':'), default=str)
    return hashlib.sha256(text.encode()).hexdigest()


class CacheManager:
    """Process-wide bounded LRU of computed results."""

    _instance = None
    _instance_lock = threading.Lock()

    def __new__(cls):
        with cls._instance_lock:
            if cls._instance is None:
                instance = super().__new__(cls)
                instance._entries = OrderedDict()
                instance._guard = threading.RLock()
                instance._pending = {}
                instance._max_entries = CYKIT_CACHE_SIZE
                instance._hits = Counter()
                instance._misses = Counter()
                cls._instance = instance
                logger.debug("Cache created", max_entries=CYKIT_CACHE_SIZE)
        return cls._instance

    def get(self, key: str, namespace: str = 'default') -> Optional[Any]:
        """The cached value for ``key``, or None (counted as a miss)."""
        with self._guard:
            value = self._entries.get(key, _MISSING)
            if value is _MISSING:
                self._misses[namespace] += 1
                return None
            self._entries.move_to_end(key)
            self._hits[namespace] += 1
            return value

    def set(self, key: str, value: Any) -> None:
        """Store ``value``; the least recently used entries go once the bound is reached."""
        with self._guard:
            self._entries[key] = value
            self._entries.move_to_end(key)
            while len(self._entries) > max(self._max_entries, 0):
                evicted, _ = self._entries.popitem(last=False)
                metrics.counter("cache.evictions").inc()
                logger.debug("Cache evict", key=evicted[:12])

    def get_or_compute(self, key: str, compute: Callable[[], Any], namespace: str = 'default') -> Any:
        """
        Return the cached value, computing it once if absent.

        A second caller for a key that is being computed waits for the first
        one. If the computation raises, nothing is stored and waiters retry.
        """
        while True:
            with self._guard:
                value = self.get(key, namespace)
                if value is not None:
                    return value
                pending = self._pending.get(key)
                if pending is None:
                    pending = self._pending[key] = threading.Event()
                    owner = True
                else:
                    owner = False
            if not owner:
                pending.wait()
                continue
            try:
                value = compute()
                self.set(key, value)
                return value
            finally:
                with self._guard:
                    del self._pending[key]
                pending.set()

    def clear(self) -> None:
        """Drop every entry and reset the counters."""
        with self._guard:
            self._entries.clear()
            self._hits.clear()
            self._misses.clear()

    def get_stats(self) -> Dict[str, Any]:
        """
        Cache statistics.

        Returns:
            dict: entry count, bound, total hits and misses, and both per namespace
        """
        with self._guard:
            return {
                "total_items": len(self._entries),
                "max_entries": self._max_entries,
                "hits": sum(self._hits.values()),
                "misses": sum(self._misses.values()),
                "by_namespace": {ns: {"hits": self._hits[ns], "misses": self._misses[ns]}
                                 for ns in sorted(set(self._hits) | set(self._misses))},
            }


def cached(key_func: Callable[..., Any]):
    """
    Memoize a function in the shared cache.

    Args:
        key_func: Maps the call arguments to a JSON-serializable key payload,
            or to None to bypass the cache for that call

    Returns:
        The decorated function; its namespace in the statistics is its name
    """
    def decorator(func):
        namespace = func.__name__

        @functools.wraps(func)
        def wrapper(*args, **kwargs):
            payload = key_func(*args, **kwargs)
            if payload is None:
                return func(*args, **kwargs)
            key = digest([func.__module__, namespace, payload])
            return cache_manager.get_or_compute(key, lambda: func(*args, **kwargs), namespace)

        return wrapper

    return decorator


cache_manager = CacheManager()
