"""
Tests for the cache_manager module.
"""

import threading
import time
import unittest
from concurrent.futures import ThreadPoolExecutor
from unittest.mock import patch

from cache_manager import CacheManager, cached, digest


class TestCacheManager(unittest.TestCase):
    """Test cases for CacheManager and the cached decorator."""

    def setUp(self):
        self.cache = CacheManager()
        self.cache.clear()

    def tearDown(self):
        self.cache.clear()

    def test_singleton(self):
        self.assertIs(CacheManager(), self.cache)

    def test_hits_and_misses(self):
        self.assertIsNone(self.cache.get('k'))
        self.cache.set('k', 1)
        self.assertEqual(self.cache.get('k'), 1)
        stats = self.cache.get_stats()
        self.assertEqual((stats['hits'], stats['misses']), (1, 1))

    def test_least_recently_used_is_evicted(self):
        with patch.object(self.cache, '_max_entries', 2):
            self.cache.set('a', 1)
            self.cache.set('b', 2)
            self.cache.get('a')
            self.cache.set('c', 3)
            self.assertIsNone(self.cache.get('b'))
            self.assertEqual(self.cache.get('a'), 1)

    def test_digest_ignores_key_order(self):
        self.assertEqual(digest({'x': 1, 'y': [2]}), digest({'y': [2], 'x': 1}))
        self.assertNotEqual(digest({'x': 1}), digest({'x': 2}))

    def test_cached_decorator(self):
        calls = []

        @cached(key_func=lambda n: None if n < 0 else n)
        def square(n):
            calls.append(n)
            return n * n

        self.assertEqual(square(3), 9)
        self.assertEqual(square(3), 9)
        self.assertEqual(square(-2), 4)
        self.assertEqual(square(-2), 4)
        self.assertEqual(calls, [3, -2, -2])
        self.assertEqual(self.cache.get_stats()['by_namespace']['square'], {'hits': 1, 'misses': 1})

    def test_concurrent_callers_compute_once(self):
        calls = []
        started = threading.Event()

        def slow():
            calls.append(1)
            started.set()
            time.sleep(0.05)
            return 'value'

        with ThreadPoolExecutor(max_workers=4) as executor:
            first = executor.submit(self.cache.get_or_compute, 'slow', slow)
            started.wait()
            others = [executor.submit(self.cache.get_or_compute, 'slow', slow) for _ in range(3)]
            results = [first.result()] + [f.result() for f in others]
        self.assertEqual(results, ['value'] * 4)
        self.assertEqual(len(calls), 1)

    def test_failed_computation_is_not_stored(self):
        def broken():
            raise ValueError('no')

        with self.assertRaises(ValueError):
            self.cache.get_or_compute('k', broken)
        self.assertEqual(self.cache.get_or_compute('k', lambda: 2), 2)


if __name__ == '__main__':
    unittest.main()
