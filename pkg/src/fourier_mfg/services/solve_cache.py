"""LRU cache for deterministic solver results."""

from __future__ import annotations

import hashlib
import threading
import time
from collections import OrderedDict
from dataclasses import dataclass
from typing import Any, Generic, TypeVar

T = TypeVar("T")


@dataclass
class CacheEntry(Generic[T]):
    """Cached result with bookkeeping."""

    value: T
    created_at: float
    hits: int = 0


class SolveCache:
    """Thread-safe LRU cache.

    Solves are pure functions of (model, solver config, time, measure), so
    entries never expire; they are only evicted by capacity.
    """

    def __init__(self, max_entries: int = 256):
        self._cache: OrderedDict[str, CacheEntry[Any]] = OrderedDict()
        self._max_entries = max_entries
        self._lock = threading.Lock()
        self._hits = 0
        self._misses = 0

    @staticmethod
    def make_key(*parts: str | bytes | float | int) -> str:
        """Hash heterogeneous key parts into a fixed-length key."""
        digest = hashlib.sha256()
        for part in parts:
            digest.update(part if isinstance(part, bytes) else repr(part).encode("utf-8"))
            digest.update(b"\x00")
        return digest.hexdigest()

    def get(self, key: str) -> Any | None:
        """Get a cached value and mark it most recently used."""
        with self._lock:
            entry = self._cache.get(key)
            if entry is None:
                self._misses += 1
                return None
            entry.hits += 1
            self._hits += 1
            self._cache.move_to_end(key)
            return entry.value

    def set(self, key: str, value: Any) -> None:
        """Store a value, evicting the least recently used entries over capacity."""
        with self._lock:
            self._cache[key] = CacheEntry(value=value, created_at=time.time())
            self._cache.move_to_end(key)
            while len(self._cache) > self._max_entries:
                self._cache.popitem(last=False)

    def delete(self, key: str) -> None:
        with self._lock:
            self._cache.pop(key, None)

    def clear(self) -> None:
        with self._lock:
            self._cache.clear()
            self._hits = 0
            self._misses = 0

    @property
    def size(self) -> int:
        return len(self._cache)

    def stats(self) -> dict[str, int]:
        with self._lock:
            return {"size": len(self._cache), "hits": self._hits, "misses": self._misses}
