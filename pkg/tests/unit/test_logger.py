"""
Unit tests for the logging setup
"""

import json

import pytest

from hitlab.utils.logger import configure_logging, logger


@pytest.fixture(autouse=True)
def default_sinks():
    yield
    configure_logging()


class TestConsoleSink:
    """stderr sink with the bound operation context"""

    def test_bound_context_is_shown(self, capsys):
        # Arrange
        configure_logging("DEBUG")

        # Act
        logger.bind(operation="sep_profile", system="full_shift").info("profile done")

        # Assert
        captured = capsys.readouterr()
        assert "[sep_profile full_shift] profile done" in captured.err
        assert captured.out == ""

    def test_plain_message_has_no_brackets(self, capsys):
        configure_logging("INFO")

        logger.info("plain message")

        err = capsys.readouterr().err
        assert "| INFO     | plain message" in err
        assert "[" not in err

    def test_level_filters(self, capsys):
        configure_logging("WARNING")

        logger.info("hidden")
        logger.warning("shown")

        err = capsys.readouterr().err
        assert "hidden" not in err
        assert "shown" in err


class TestFileSink:
    def test_json_lines_keep_extra(self, tmp_path):
        # Arrange
        target = tmp_path / "run.log"
        configure_logging("INFO", str(target))

        # Act
        logger.bind(operation="verify_newprop", base=10).debug("checked")
        configure_logging()

        # Assert
        record = json.loads(target.read_text().splitlines()[-1])["record"]
        assert record["message"] == "checked"
        assert record["extra"] == {"operation": "verify_newprop", "base": 10}
        assert record["level"]["name"] == "DEBUG"
