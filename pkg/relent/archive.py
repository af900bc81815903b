"""A SQLite archive of suite reports.

Suites are deterministic in their arguments, so a stored report stands in for
a rerun. Keys are 16-byte BLAKE2b digests of the run arguments; values are
zstd-compressed canonical report JSON.
"""

from __future__ import annotations

import hashlib
import logging
import os
import sqlite3
from collections.abc import Iterator
from contextlib import closing, contextmanager, suppress
from pathlib import Path

from .errors import ArchiveError
from .harness import SuiteReport, report_bytes, report_serializer
from .randgen import GenConfig
from .zstd import ReportCodec

logger = logging.getLogger(__name__)

BUILD_TABLE = """
  CREATE TABLE IF NOT EXISTS reports (
    key BLOB UNIQUE NOT NULL PRIMARY KEY,
    suite TEXT NOT NULL,
    value BLOB NOT NULL
  )
"""
GET_SIZE = "SELECT COUNT(key) FROM reports"
LOOKUP_KEY = "SELECT value FROM reports WHERE key = ?"
EXISTS_KEY = "SELECT 1 FROM reports WHERE key = ? LIMIT 1"
STORE_KV = "REPLACE INTO reports (key, suite, value) VALUES (?, ?, ?)"
ITER_KEYS = "SELECT key FROM reports ORDER BY suite, key"
ITER_VALUES = "SELECT value FROM reports ORDER BY suite, key"
CLEAR = "DELETE FROM reports"

_ERR_CLOSED = "report archive has already been closed"


def run_key(suite: str, trials: int, cfg: GenConfig, tol: float) -> bytes:
    """The archive key of one run: everything a report depends on."""
    data = (
        f"{suite}\x00{trials}\x00{cfg.seed}\x00{cfg.max_size}\x00{tol!r}\x00{cfg.full_support}\x00{cfg.dirichlet_like}"
    )
    return hashlib.blake2b(data.encode(), digest_size=16).digest()


def report_key(report: SuiteReport) -> bytes:
    return run_key(report.suite, report.trials, report.config(), report.tol)


class ReportArchive:
    """Stored :class:`SuiteReport` objects keyed by their run arguments.

    ``flag`` follows :mod:`dbm`: ``'r'`` read only, ``'w'`` read/write on an
    existing file, ``'c'`` create if missing, ``'n'`` always start empty.
    Using the archive as a context manager wraps the block in one transaction.
    """

    def __init__(self, path, flag: str = "c", mode: int = 0o666):
        path = os.fsdecode(path)
        match flag:
            case "r":
                uri_mode = "ro"
            case "w":
                uri_mode = "rw"
            case "c":
                uri_mode = "rwc"
            case "n":
                uri_mode = "rwc"
                Path(path).unlink(missing_ok=True)
            case _:
                raise ValueError(f"Flag must be one of 'r', 'w', 'c', or 'n', not {flag!r}")
        if uri_mode == "rwc":
            Path(path).touch(mode=mode, exist_ok=True)

        uri = f"{Path(path).absolute().as_uri()}?mode={uri_mode}"
        try:
            self._cx: sqlite3.Connection | None = sqlite3.connect(uri, uri=True, autocommit=True)
        except sqlite3.Error as exc:
            raise ArchiveError(f"cannot open report archive {path!r}: {exc}") from exc
        self._in_tx = False
        self.path = path
        self.codec = ReportCodec()

        with suppress(sqlite3.OperationalError):
            self._cx.execute("PRAGMA journal_mode = wal")
            self._cx.execute("PRAGMA busy_timeout = 5000")
        if uri_mode != "ro":
            with self._execute(BUILD_TABLE):
                pass

    def _execute(self, *args):
        if not self._cx:
            raise ArchiveError(_ERR_CLOSED)
        try:
            return closing(self._cx.execute(*args))
        except sqlite3.Error as exc:
            raise ArchiveError(str(exc)) from exc

    def __len__(self) -> int:
        with self._execute(GET_SIZE) as cu:
            return cu.fetchone()[0]

    def __contains__(self, key: bytes) -> bool:
        with self._execute(EXISTS_KEY, (key,)) as cu:
            return cu.fetchone() is not None

    def _decode(self, blob: bytes) -> SuiteReport:
        return report_serializer.unserialize(self.codec.decompress(blob))

    def get(self, key: bytes) -> SuiteReport | None:
        with self._execute(LOOKUP_KEY, (key,)) as cu:
            row = cu.fetchone()
        if row is None:
            logger.debug("archive miss %s", key.hex())
            return None
        logger.debug("archive hit %s", key.hex())
        return self._decode(row[0])

    def lookup(self, suite: str, trials: int, cfg: GenConfig, tol: float) -> SuiteReport | None:
        return self.get(run_key(suite, trials, cfg, tol))

    def put(self, report: SuiteReport) -> bytes:
        """Store ``report`` without its timing and return its key."""
        key = report_key(report)
        value = self.codec.compress(report_bytes(report, timings=False))
        with self._execute(STORE_KV, (key, report.suite, value)):
            pass
        return key

    def keys(self) -> list[bytes]:
        with self._execute(ITER_KEYS) as cu:
            return [row[0] for row in cu.fetchall()]

    def reports(self) -> Iterator[SuiteReport]:
        with self._execute(ITER_VALUES) as cu:
            blobs = [row[0] for row in cu.fetchall()]
        for blob in blobs:
            yield self._decode(blob)

    def clear(self) -> None:
        with self._execute(CLEAR):
            pass

    # ------------------------------------------------------------------
    # Explicit transactions. The connection is in autocommit mode, so
    # transactions are driven with SQL statements.
    # ------------------------------------------------------------------
    def begin(self) -> None:
        """Open a transaction; a no-op if one is already open."""
        if not self._cx:
            raise ArchiveError(_ERR_CLOSED)
        if not self._in_tx:
            self._run_tx("BEGIN")
            self._in_tx = True

    def _end(self, statement: str) -> None:
        if not self._cx or not self._in_tx:
            return
        self._in_tx = False
        self._run_tx(statement)

    def _run_tx(self, statement: str) -> None:
        try:
            self._cx.execute(statement)
        except sqlite3.Error as exc:
            raise ArchiveError(f"{statement} failed on {self.path!r}: {exc}") from exc

    def commit(self) -> None:
        self._end("COMMIT")

    def rollback(self) -> None:
        self._end("ROLLBACK")

    @contextmanager
    def transaction(self):
        """Store every report of the block at once, or none if it raises."""
        self.begin()
        done = False
        try:
            yield self
            done = True
        finally:
            self._end("COMMIT" if done else "ROLLBACK")

    def close(self) -> None:
        if self._cx:
            if self._in_tx:
                with suppress(sqlite3.Error):
                    self._cx.execute("ROLLBACK")
                self._in_tx = False
            self._cx.close()
            self._cx = None

    def __enter__(self) -> ReportArchive:
        self.begin()
        return self

    def __exit__(self, exc_type, *args) -> None:
        try:
            self._end("ROLLBACK" if exc_type else "COMMIT")
        finally:
            self.close()
