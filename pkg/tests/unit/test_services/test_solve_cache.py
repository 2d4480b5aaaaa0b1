"""Tests for the solve cache."""

from concurrent.futures import ThreadPoolExecutor

from fourier_mfg.services.solve_cache import SolveCache


class TestSolveCache:
    def test_set_and_get(self):
        """Test basic set and get."""
        cache = SolveCache(max_entries=10)
        cache.set("key1", "value1")
        assert cache.get("key1") == "value1"

    def test_get_missing_key(self):
        """Test getting a non-existent key returns None."""
        cache = SolveCache(max_entries=10)
        assert cache.get("nonexistent") is None

    def test_lru_eviction(self):
        """The least recently used entry goes first."""
        cache = SolveCache(max_entries=2)
        cache.set("a", 1)
        cache.set("b", 2)
        cache.get("a")
        cache.set("c", 3)
        assert cache.get("b") is None
        assert cache.get("a") == 1
        assert cache.get("c") == 3
        assert cache.size == 2

    def test_overwrite_refreshes_entry(self):
        cache = SolveCache(max_entries=2)
        cache.set("a", 1)
        cache.set("b", 2)
        cache.set("a", 10)
        cache.set("c", 3)
        assert cache.get("a") == 10
        assert cache.get("b") is None

    def test_delete(self):
        """Test deleting an entry."""
        cache = SolveCache(max_entries=10)
        cache.set("key1", "value1")
        cache.delete("key1")
        cache.delete("missing")
        assert cache.get("key1") is None

    def test_clear_resets_stats(self):
        """Test clearing all entries and counters."""
        cache = SolveCache(max_entries=10)
        cache.set("key1", "value1")
        cache.get("key1")
        cache.get("key2")
        cache.clear()
        assert cache.stats() == {"size": 0, "hits": 0, "misses": 0}

    def test_stats_count_hits_and_misses(self):
        cache = SolveCache(max_entries=10)
        cache.set("key1", "value1")
        cache.get("key1")
        cache.get("key1")
        cache.get("other")
        assert cache.stats() == {"size": 1, "hits": 2, "misses": 1}

    def test_make_key_is_stable(self):
        """Keys depend on every part and on the part boundaries."""
        key = SolveCache.make_key("model", 0.25, 3, b"\x01\x02")
        assert key == SolveCache.make_key("model", 0.25, 3, b"\x01\x02")
        assert key != SolveCache.make_key("model", 0.25, 4, b"\x01\x02")
        assert SolveCache.make_key("ab", "c") != SolveCache.make_key("a", "bc")
        assert len(key) == 64

    def test_concurrent_access(self):
        """Parallel writers never push the cache over capacity."""
        cache = SolveCache(max_entries=32)

        def work(i: int) -> None:
            cache.set(f"k{i}", i)
            cache.get(f"k{i // 2}")

        with ThreadPoolExecutor(max_workers=8) as pool:
            list(pool.map(work, range(200)))
        assert cache.size == 32
        stats = cache.stats()
        assert stats["hits"] + stats["misses"] == 200
