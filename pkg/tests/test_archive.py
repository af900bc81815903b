"""Tests for :mod:`relent.archive`: the SQLite report archive."""

from __future__ import annotations

import sqlite3
from pathlib import Path

import pytest

from relent.archive import ReportArchive, report_key, run_key
from relent.errors import ArchiveError
from relent.harness import report_bytes, run_suite
from relent.randgen import GenConfig

CFG = GenConfig(seed=5, max_size=3)


@pytest.fixture(scope="module")
def report():
    return run_suite("gibbs", 4, CFG)


@pytest.fixture(scope="module")
def other():
    return run_suite("marginals", 4, CFG)


class TestKeys:
    def test_key_covers_every_argument(self):
        base = run_key("gibbs", 4, CFG, 1e-8)
        assert len(base) == 16
        assert run_key("gibbs", 4, CFG, 1e-8) == base
        variants = [
            run_key("marginals", 4, CFG, 1e-8),
            run_key("gibbs", 5, CFG, 1e-8),
            run_key("gibbs", 4, CFG.with_seed(6), 1e-8),
            run_key("gibbs", 4, CFG.sparse(), 1e-8),
            run_key("gibbs", 4, CFG, 1e-9),
        ]
        assert base not in variants
        assert len(set(variants)) == len(variants)

    def test_report_key_matches_run_key(self, report):
        assert report_key(report) == run_key("gibbs", 4, CFG, report.tol)


class TestFlags:
    def test_flag_r_requires_existing_file(self, tmp_path: Path):
        with pytest.raises(ArchiveError):
            ReportArchive(tmp_path / "missing.db", flag="r")

    def test_flag_c_creates_file(self, archive_path: str):
        ReportArchive(archive_path, flag="c").close()
        assert Path(archive_path).exists()

    def test_flag_n_truncates(self, archive_path: str, report):
        with ReportArchive(archive_path) as archive:
            archive.put(report)
        with ReportArchive(archive_path, flag="n") as archive:
            assert len(archive) == 0

    def test_flag_r_is_read_only(self, archive_path: str, report):
        ReportArchive(archive_path).close()
        archive = ReportArchive(archive_path, flag="r")
        try:
            with pytest.raises(ArchiveError):
                archive.put(report)
        finally:
            archive.close()

    def test_bad_flag(self, archive_path: str):
        with pytest.raises(ValueError):
            ReportArchive(archive_path, flag="x")


class TestStorage:
    def test_put_get_lookup(self, archive_path: str, report):
        with ReportArchive(archive_path) as archive:
            key = archive.put(report)
            assert key in archive
            assert len(archive) == 1
            stored = archive.get(key)
        assert stored.elapsed is None
        assert report_bytes(stored) == report_bytes(report)

    def test_persistence_across_reopen(self, archive_path: str, report):
        with ReportArchive(archive_path) as archive:
            archive.put(report)
        with ReportArchive(archive_path, flag="r") as archive:
            assert archive.lookup("gibbs", 4, CFG, report.tol).passes == report.passes
            assert archive.lookup("gibbs", 4, CFG.with_seed(1), report.tol) is None

    def test_put_replaces(self, archive_path: str, report):
        with ReportArchive(archive_path) as archive:
            archive.put(report)
            archive.put(report)
            assert len(archive) == 1

    def test_reports_ordered_by_suite(self, archive_path: str, report, other):
        with ReportArchive(archive_path) as archive:
            archive.put(other)
            archive.put(report)
            assert [r.suite for r in archive.reports()] == ["gibbs", "marginals"]
            assert len(archive.keys()) == 2
            archive.clear()
            assert len(archive) == 0


class TestTransactions:
    def test_rollback_on_error(self, archive_path: str, report):
        archive = ReportArchive(archive_path)
        try:
            with pytest.raises(RuntimeError):
                with archive.transaction():
                    archive.put(report)
                    raise RuntimeError("abort")
            assert len(archive) == 0
            with archive.transaction():
                archive.put(report)
            assert len(archive) == 1
        finally:
            archive.close()

    def test_context_manager_rolls_back(self, archive_path: str, report):
        with pytest.raises(RuntimeError):
            with ReportArchive(archive_path) as archive:
                archive.put(report)
                raise RuntimeError("abort")
        with ReportArchive(archive_path, flag="r") as archive:
            assert len(archive) == 0

    def test_begin_is_reentrant(self, archive_path: str, report):
        archive = ReportArchive(archive_path)
        try:
            archive.begin()
            archive.begin()
            archive.put(report)
            archive.commit()
            archive.commit()
            assert len(archive) == 1
        finally:
            archive.close()

    def test_closed_archive(self, archive_path: str):
        archive = ReportArchive(archive_path)
        archive.close()
        archive.close()
        with pytest.raises(ArchiveError):
            len(archive)
        with pytest.raises(ArchiveError):
            archive.begin()

    def test_failed_commit_raises_archive_error(self, archive_path: str, report):
        class RefusingCommit:
            def __init__(self, cx: sqlite3.Connection):
                self.cx = cx

            def execute(self, statement, *args):
                if statement == "COMMIT":
                    raise sqlite3.OperationalError("database is locked")
                return self.cx.execute(statement, *args)

            def close(self):
                self.cx.close()

        archive = ReportArchive(archive_path)
        try:
            archive.begin()
            archive.put(report)
            archive._cx = RefusingCommit(archive._cx)
            with pytest.raises(ArchiveError, match="COMMIT failed"):
                archive.commit()
            archive.commit()
        finally:
            archive.close()
        with ReportArchive(archive_path, flag="r") as reopened:
            assert len(reopened) == 0
