"""
On-disk cache of epsilon tables.

Tables are stored in a single SQLite file (``epsilon_cache.db``) inside the
directory named by ``EPOSIC_CACHE_DIR``. Each row keeps the canonical exact
payload of one table together with its SHA-256 digest; a row whose digest
does not match is reported with ``[WARN]`` and treated as a miss.

Typical usage
-------------
>>> from Eposic.cache import EpsilonCache
>>> cache = EpsilonCache("/tmp/eposic")
>>> cache.connect()
>>> table = cache.load(CGIndex(2, 1, 1))   # None on a miss
>>> cache.store(CGIndex(2, 1, 1), compute_epsilon_table(CGIndex(2, 1, 1)))
>>> cache.close()
"""

import hashlib
import os
import sqlite3
import threading
from typing import Optional

from Eposic.clebsch import CGIndex, EpsilonTable
from Eposic.config import CACHE_BUSY_TIMEOUT, CACHE_DB_NAME
from Eposic.errors import ParseError, warn
from Eposic.serialization import epsilon_table_from_payload, epsilon_table_payload

# Serialises writers across threads of one process
_WRITE_LOCK = threading.Lock()


# ----------------------------------------------------------------------
# Helper functions
# ----------------------------------------------------------------------
def _enable_wal(conn: sqlite3.Connection) -> bool:
    """Switch *conn* to WAL journaling; returns False when the file system refuses."""
    try:
        mode = conn.execute("PRAGMA journal_mode=WAL;").fetchone()[0]
    except sqlite3.Error as exc:
        warn(f"Epsilon cache stays in rollback-journal mode: {exc}")
        return False
    if str(mode).lower() != "wal":
        warn(f"Epsilon cache journal mode is {mode!r}, not WAL")
        return False
    return True


def payload_digest(payload: str) -> str:
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


# ----------------------------------------------------------------------
# Cache
# ----------------------------------------------------------------------
class EpsilonCache:
    """SQLite-backed store of epsilon tables keyed by (m, n, h)."""

    def __init__(self, cache_dir: str):
        self.cache_dir = cache_dir
        self.conn: Optional[sqlite3.Connection] = None
        self.db_path: Optional[str] = None
        self.wal = False

    def connect(self) -> None:
        """Open (and create if needed) the cache database."""
        if self.conn:
            self.close()
        os.makedirs(self.cache_dir, exist_ok=True)
        db_path = os.path.join(self.cache_dir, CACHE_DB_NAME)
        try:
            self.conn = sqlite3.connect(db_path, timeout=CACHE_BUSY_TIMEOUT, check_same_thread=False)
            self.wal = _enable_wal(self.conn)
            self.conn.execute(
                "CREATE TABLE IF NOT EXISTS epsilon_tables ("
                "m INTEGER NOT NULL, n INTEGER NOT NULL, h INTEGER NOT NULL, "
                "payload TEXT NOT NULL, digest TEXT NOT NULL, "
                "PRIMARY KEY (m, n, h))"
            )
            self.conn.commit()
        except sqlite3.Error as exc:
            self.close()
            raise OSError(f"Cannot open epsilon cache at {db_path}: {exc}") from exc
        self.db_path = db_path

    def close(self) -> None:
        conn, self.conn, self.db_path, self.wal = self.conn, None, None, False
        if conn is None:
            return
        try:
            conn.close()
        except sqlite3.Error as exc:
            warn(f"Epsilon cache did not close cleanly: {exc}")

    def _ensure_connection(self) -> sqlite3.Connection:
        if not self.conn:
            raise sqlite3.Error("No active cache connection.")
        return self.conn

    def load(self, index: CGIndex) -> Optional[EpsilonTable]:
        conn = self._ensure_connection()
        row = conn.execute(
            "SELECT payload, digest FROM epsilon_tables WHERE m = ? AND n = ? AND h = ?",
            (index.m, index.n, index.h),
        ).fetchone()
        if row is None:
            return None
        payload, digest = row
        if payload_digest(payload) != digest:
            warn(f"Digest mismatch for cached epsilon table {index}; recomputing.")
            return None
        try:
            return epsilon_table_from_payload(index, payload)
        except ParseError as exc:
            warn(f"Unreadable cached epsilon table {index}: {exc}")
            return None

    def store(self, index: CGIndex, table: EpsilonTable) -> None:
        conn = self._ensure_connection()
        payload = epsilon_table_payload(table)
        with _WRITE_LOCK:
            conn.execute(
                "INSERT OR REPLACE INTO epsilon_tables (m, n, h, payload, digest) VALUES (?, ?, ?, ?, ?)",
                (index.m, index.n, index.h, payload, payload_digest(payload)),
            )
            conn.commit()
