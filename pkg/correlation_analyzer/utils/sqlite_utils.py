"""SQLite plumbing shared by the results store."""

from __future__ import annotations

import logging
import sqlite3
import threading
from contextlib import contextmanager
from pathlib import Path
from queue import Empty, Queue
from typing import Iterator, List, Union

logger = logging.getLogger(__name__)

DEFAULT_BUSY_TIMEOUT_MS = 5000


def open_connection(db_path: Union[str, Path], busy_timeout_ms: int) -> sqlite3.Connection:
    """Open a connection configured for concurrent writers (WAL + busy timeout)."""
    conn = sqlite3.connect(str(db_path), check_same_thread=False)
    conn.execute(f"PRAGMA busy_timeout = {int(busy_timeout_ms)}")
    if str(db_path) != ":memory:":
        conn.execute("PRAGMA journal_mode = WAL")
    return conn


class SQLiteConnectionPool:
    """Thread-safe pool of long-lived connections to one database file."""

    def __init__(
        self,
        db_path: Union[str, Path],
        pool_size: int = 4,
        busy_timeout_ms: int = DEFAULT_BUSY_TIMEOUT_MS,
    ) -> None:
        if pool_size < 1:
            raise ValueError(f"pool_size must be >= 1, got {pool_size}")
        self.db_path = str(db_path)
        self.pool_size = pool_size
        self._pool: "Queue[sqlite3.Connection]" = Queue(maxsize=pool_size)
        self._all: List[sqlite3.Connection] = []
        self._closed = False
        self._lock = threading.Lock()
        for _ in range(pool_size):
            conn = open_connection(self.db_path, busy_timeout_ms)
            self._all.append(conn)
            self._pool.put(conn)
        logger.debug("[POOL] %d connexions ouvertes sur %s", pool_size, self.db_path)

    @property
    def closed(self) -> bool:
        return self._closed

    @contextmanager
    def get(self) -> Iterator[sqlite3.Connection]:
        if self._closed:
            raise sqlite3.ProgrammingError("connection pool is closed")
        conn = self._pool.get()
        try:
            yield conn
        finally:
            self._pool.put(conn)

    def close(self) -> None:
        with self._lock:
            if self._closed:
                return
            self._closed = True
            while True:
                try:
                    self._pool.get_nowait()
                except Empty:
                    break
            for conn in self._all:
                conn.close()
            self._all.clear()
        logger.debug("[POOL] fermé: %s", self.db_path)


__all__ = ["SQLiteConnectionPool", "open_connection"]
