"""Shared pytest fixtures for relent tests."""

from __future__ import annotations

from pathlib import Path

import pytest

from relent.randgen import GenConfig, InstanceGenerator

DATA_DIR = Path(__file__).resolve().parent.parent / "relent" / "data"


@pytest.fixture
def archive_path(tmp_path: Path) -> str:
    """Return a unique, non-existing report archive path inside tmp_path."""
    return str(tmp_path / "reports.db")


@pytest.fixture
def doc_path(tmp_path: Path) -> Path:
    """Return a non-existing document path inside tmp_path."""
    return tmp_path / "doc.json"


@pytest.fixture
def data_dir() -> Path:
    return DATA_DIR


@pytest.fixture
def cfg() -> GenConfig:
    return GenConfig(seed=42, max_size=6)


@pytest.fixture
def gen(cfg: GenConfig) -> InstanceGenerator:
    return InstanceGenerator(cfg)
