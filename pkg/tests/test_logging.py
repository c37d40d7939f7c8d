"""Tests for logging setup."""

import logging
from logging.handlers import RotatingFileHandler

import pytest

from segtransfer.config.settings import Settings
from segtransfer.utils.logger import (
    PACKAGE_LOGGER,
    owned_handlers,
    resolve_level,
    setup_logging,
    setup_logging_from_settings,
)


@pytest.fixture(autouse=True)
def restore_package_logger():
    package = logging.getLogger(PACKAGE_LOGGER)
    level = package.level
    yield
    for handler in owned_handlers(package):
        package.removeHandler(handler)
        handler.close()
    package.setLevel(level)


def test_level_names_are_case_insensitive():
    assert resolve_level("debug") == logging.DEBUG
    assert resolve_level(" Warning ") == logging.WARNING
    assert resolve_level(logging.ERROR) == logging.ERROR


def test_unknown_level_rejected():
    with pytest.raises(ValueError, match="LOUD"):
        setup_logging("LOUD")


def test_repeated_setup_keeps_one_console_handler():
    setup_logging("INFO")
    package = setup_logging("DEBUG")
    assert len(owned_handlers(package)) == 1
    assert package.level == logging.DEBUG
    assert not any(getattr(h, "_segtransfer_handler", False) for h in logging.getLogger().handlers)


def test_log_file_created_under_missing_directory(tmp_path):
    path = tmp_path / "logs" / "run.log"
    setup_logging("INFO", path)
    logging.getLogger("segtransfer.harness.experiment").info("transfer started")
    for handler in owned_handlers():
        handler.flush()
    assert "segtransfer.harness.experiment - INFO - transfer started" in path.read_text()


def test_dependencies_stay_at_warning_or_above():
    setup_logging("DEBUG")
    assert logging.getLogger("PIL").level == logging.WARNING
    setup_logging("ERROR")
    assert logging.getLogger("reportlab").level == logging.ERROR


def test_settings_supply_rotation_limits(tmp_path, monkeypatch):
    monkeypatch.setenv("SEGTRANSFER_LOG_FILE", str(tmp_path / "seg.log"))
    monkeypatch.setenv("SEGTRANSFER_LOG_MAX_BYTES", "2048")
    monkeypatch.setenv("SEGTRANSFER_LOG_BACKUP_COUNT", "2")
    package = setup_logging_from_settings(Settings(), log_level="warning")
    rotating = [h for h in owned_handlers(package) if isinstance(h, RotatingFileHandler)]
    assert len(rotating) == 1
    assert (rotating[0].maxBytes, rotating[0].backupCount) == (2048, 2)
    assert package.level == logging.WARNING
