"""Cache SQLite des polynômes M_ef(q) et journal des rapports d'exécution."""

from __future__ import annotations

import hashlib
import json
import logging
import sqlite3
import threading
from contextlib import contextmanager
from pathlib import Path
from typing import Any, Dict, Iterator, Optional, Union

from tenacity import (
    retry,
    retry_if_exception_type,
    stop_after_attempt,
    wait_exponential,
)

from correlation_analyzer.modules.multigraph import Multigraph, format_graph
from correlation_analyzer.modules.polyring import MPoly
from correlation_analyzer.utils.sqlite_utils import DEFAULT_BUSY_TIMEOUT_MS, SQLiteConnectionPool

logger = logging.getLogger(__name__)

_locked_retry = retry(
    retry=retry_if_exception_type(sqlite3.OperationalError),
    stop=stop_after_attempt(3),
    wait=wait_exponential(multiplier=0.05, max=1),
    reraise=True,
)


DEFAULT_MAX_ENTRIES = 5000
DEFAULT_MAX_REPORTS = 500
DEFAULT_MAX_AGE_DAYS = 30.0


def graph_fingerprint(g: Multigraph) -> str:
    """Composite key: hash of the canonical graph text plus the edge count."""
    digest = hashlib.sha256(format_graph(g).encode("utf-8")).hexdigest()
    return f"{digest}_{len(g.edges)}"


class ResultsCache:
    """Cache SQLite des résultats exacts, partagé entre threads."""

    def __init__(
        self,
        db_path: Union[str, Path],
        pool_size: int = 2,
        busy_timeout_ms: int = DEFAULT_BUSY_TIMEOUT_MS,
        max_entries: int = DEFAULT_MAX_ENTRIES,
        max_reports: int = DEFAULT_MAX_REPORTS,
        max_age_days: Optional[float] = DEFAULT_MAX_AGE_DAYS,
    ) -> None:
        self.db_path = Path(db_path)
        self.max_entries = max_entries
        self.max_reports = max_reports
        self.max_age_days = max_age_days
        self._lock = threading.RLock()
        self._pool = SQLiteConnectionPool(self.db_path, pool_size, busy_timeout_ms)
        self._lookups = 0
        self._hits = 0
        self._ensure_schema()
        self.cleanup_expired_and_oversized()

    def close(self) -> None:
        self._pool.close()

    def __enter__(self) -> "ResultsCache":
        return self

    def __exit__(self, exc_type, exc_val, exc_tb) -> None:
        self.close()

    @contextmanager
    def _connection(self) -> Iterator[sqlite3.Connection]:
        with self._pool.get() as conn:
            yield conn

    @_locked_retry
    def _ensure_schema(self) -> None:
        with self._lock, self._connection() as conn:
            conn.execute(
                """
                CREATE TABLE IF NOT EXISTS mpoly_cache (
                    cache_key TEXT PRIMARY KEY,
                    vertex_count INTEGER NOT NULL,
                    edge_count INTEGER NOT NULL,
                    registry TEXT NOT NULL,
                    poly_json TEXT NOT NULL,
                    created_at TIMESTAMP DEFAULT CURRENT_TIMESTAMP,
                    hits_count INTEGER DEFAULT 0
                )
                """
            )
            conn.execute(
                """
                CREATE TABLE IF NOT EXISTS run_reports (
                    id INTEGER PRIMARY KEY AUTOINCREMENT,
                    command TEXT NOT NULL,
                    outcome TEXT NOT NULL,
                    report_json TEXT NOT NULL,
                    created_at TIMESTAMP DEFAULT CURRENT_TIMESTAMP
                )
                """
            )
            conn.commit()

    # ------------------------------------------------------------------
    # M_ef(q) cache
    # ------------------------------------------------------------------
    @_locked_retry
    def get_m_poly(self, g: Multigraph) -> Optional[MPoly]:
        key = graph_fingerprint(g)
        with self._lock, self._connection() as conn:
            self._lookups += 1
            row = conn.execute(
                "SELECT registry, poly_json FROM mpoly_cache WHERE cache_key = ?", (key,)
            ).fetchone()
            if row is None:
                return None
            conn.execute(
                "UPDATE mpoly_cache SET hits_count = hits_count + 1 WHERE cache_key = ?",
                (key,),
            )
            conn.commit()
            self._hits += 1
        registry = json.loads(row[0])
        logger.debug("[CACHE HIT] %s", key[:12])
        return MPoly.from_json(json.loads(row[1]), registry)

    @_locked_retry
    def store_m_poly(self, g: Multigraph, poly: MPoly) -> None:
        key = graph_fingerprint(g)
        with self._lock, self._connection() as conn:
            conn.execute(
                """
                INSERT OR REPLACE INTO mpoly_cache
                    (cache_key, vertex_count, edge_count, registry, poly_json)
                VALUES (?, ?, ?, ?, ?)
                """,
                (
                    key,
                    g.vertex_count,
                    len(g.edges),
                    json.dumps(list(poly.registry)),
                    json.dumps(poly.to_json(), sort_keys=True),
                ),
            )
            self._trim_entries(conn)
            conn.commit()

    # ------------------------------------------------------------------
    # Run reports
    # ------------------------------------------------------------------
    @_locked_retry
    def record_report(self, command: str, outcome: str, report_json: str) -> None:
        with self._lock, self._connection() as conn:
            conn.execute(
                "INSERT INTO run_reports (command, outcome, report_json) VALUES (?, ?, ?)",
                (command, outcome, report_json),
            )
            self._trim_reports(conn)
            conn.commit()

    # ------------------------------------------------------------------
    # Maintenance
    # ------------------------------------------------------------------
    def _trim_entries(self, conn: sqlite3.Connection) -> int:
        """Drop the least used, then oldest, polynomials beyond ``max_entries``."""
        total = conn.execute("SELECT COUNT(*) FROM mpoly_cache").fetchone()[0]
        excess = total - self.max_entries
        if excess <= 0:
            return 0
        cursor = conn.execute(
            """
            DELETE FROM mpoly_cache WHERE rowid IN (
                SELECT rowid FROM mpoly_cache
                ORDER BY hits_count ASC, created_at ASC, rowid ASC
                LIMIT ?
            )
            """,
            (excess,),
        )
        return cursor.rowcount

    def _trim_reports(self, conn: sqlite3.Connection) -> int:
        """Keep only the ``max_reports`` most recent run reports."""
        cursor = conn.execute(
            """
            DELETE FROM run_reports WHERE id NOT IN (
                SELECT id FROM run_reports ORDER BY id DESC LIMIT ?
            )
            """,
            (self.max_reports,),
        )
        return cursor.rowcount

    @_locked_retry
    def cleanup_expired(self) -> int:
        if self.max_age_days is None:
            return 0
        cutoff = f"-{float(self.max_age_days)} days"
        with self._lock, self._connection() as conn:
            deleted = conn.execute(
                "DELETE FROM mpoly_cache WHERE created_at <= datetime('now', ?)", (cutoff,)
            ).rowcount
            deleted += conn.execute(
                "DELETE FROM run_reports WHERE created_at <= datetime('now', ?)", (cutoff,)
            ).rowcount
            conn.commit()
        return deleted

    @_locked_retry
    def cleanup_expired_and_oversized(self) -> Dict[str, int]:
        """Nettoie les entrées expirées puis ramène les tables sous leurs limites."""
        stats = {"expired_deleted": self.cleanup_expired(), "oversized_deleted": 0}
        with self._lock, self._connection() as conn:
            stats["oversized_deleted"] = self._trim_entries(conn) + self._trim_reports(conn)
            conn.commit()
        if stats["expired_deleted"] or stats["oversized_deleted"]:
            logger.info(
                "[CACHE] nettoyage: %d expirée(s), %d en excès",
                stats["expired_deleted"],
                stats["oversized_deleted"],
            )
        return stats

    def get_stats(self) -> Dict[str, Any]:
        with self._lock, self._connection() as conn:
            total = conn.execute("SELECT COUNT(*) FROM mpoly_cache").fetchone()[0]
            stored_hits = (
                conn.execute("SELECT SUM(hits_count) FROM mpoly_cache").fetchone()[0] or 0
            )
            reports = conn.execute("SELECT COUNT(*) FROM run_reports").fetchone()[0]
        hit_rate = self._hits / self._lookups * 100 if self._lookups else 0.0
        return {
            "total_entries": total,
            "total_hits": stored_hits,
            "hit_rate": round(hit_rate, 2),
            "reports": reports,
        }

    @_locked_retry
    def clear(self) -> int:
        with self._lock, self._connection() as conn:
            deleted = conn.execute("DELETE FROM mpoly_cache").rowcount
            conn.commit()
        logger.info("[CACHE] %d entrée(s) supprimée(s)", deleted)
        return deleted


__all__ = [
    "DEFAULT_MAX_AGE_DAYS",
    "DEFAULT_MAX_ENTRIES",
    "DEFAULT_MAX_REPORTS",
    "ResultsCache",
    "graph_fingerprint",
]
