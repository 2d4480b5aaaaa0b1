"""Tests for logging setup."""

from __future__ import annotations

import json
import logging
import sys

from fourier_mfg import logging_config
from fourier_mfg.logging_config import JsonFormatter, RunFilter, bind_run, setup_logging


class TestJsonFormatter:
    """Tests for JSON log records."""

    def test_fields(self):
        """Test one JSON object with level, logger and message."""
        record = logging.LogRecord("fourier_mfg.services", logging.INFO, __file__, 1, "solved %d", (3,), None)
        payload = json.loads(JsonFormatter().format(record))
        assert payload["level"] == "INFO"
        assert payload["logger"] == "fourier_mfg.services"
        assert payload["message"] == "solved 3"
        assert "timestamp" in payload

    def test_exception_text(self):
        """Test exception info is included."""
        try:
            raise RuntimeError("boom")
        except RuntimeError:
            record = logging.LogRecord("x", logging.ERROR, __file__, 1, "failed", (), sys.exc_info())
        payload = json.loads(JsonFormatter().format(record))
        assert "RuntimeError: boom" in payload["exception"]


class TestSetupLogging:
    """Tests for root logger configuration."""

    def test_single_handler(self):
        """Test repeated setup keeps one handler."""
        setup_logging("DEBUG")
        setup_logging("DEBUG")
        root = logging.getLogger()
        assert len(root.handlers) == 1
        assert root.level == logging.DEBUG

    def test_json_format(self):
        """Test the json format installs the JSON formatter."""
        setup_logging("INFO", "json")
        assert isinstance(logging.getLogger().handlers[0].formatter, JsonFormatter)

    def test_unknown_level_falls_back(self):
        """Test an unknown level name falls back to INFO."""
        setup_logging("CHATTY")
        assert logging.getLogger("fourier_mfg").level == logging.INFO

    def test_returns_installed_handler(self):
        """Test the handler on the root logger is the one returned."""
        handler = setup_logging("INFO")
        assert logging.getLogger().handlers == [handler]


class TestRunTagging:
    """Tests for run names on records."""

    def test_no_run_by_default(self):
        """Test records outside a run get a placeholder and no JSON run field."""
        record = logging.LogRecord("x", logging.INFO, __file__, 1, "msg", (), None)
        RunFilter().filter(record)
        assert record.run == "-"
        assert "run" not in json.loads(JsonFormatter().format(record))

    def test_bound_run_reaches_json(self, monkeypatch):
        """Test an open run is stamped onto records."""
        monkeypatch.setattr(logging_config._run_filter, "run", "-")
        bind_run("sample", "draw")
        record = logging.LogRecord("x", logging.INFO, __file__, 1, "msg", (), None)
        logging_config._run_filter.filter(record)
        assert json.loads(JsonFormatter().format(record))["run"] == "sample/draw"
