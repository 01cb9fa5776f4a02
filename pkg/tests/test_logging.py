"""Tests for logging configuration."""

import logging

import pytest

from src.tcsched.logging_config import (
    NAMESPACES,
    LogBufferHandler,
    get_buffer_handler,
    get_logger,
    set_log_level,
    setup_logging,
)


def make_record(name: str, message: str, level: int = logging.INFO) -> logging.LogRecord:
    return logging.LogRecord(name, level, __file__, 1, message, None, None)


class TestLogBufferHandler:
    """Tests for the in-memory buffer."""

    def test_namespace_from_logger_name(self):
        """Test records of tcs loggers carry their namespace."""
        handler = LogBufferHandler(buffer_size=10)
        handler.emit(make_record('tcs.exact', 'solving'))
        handler.emit(make_record('uvicorn', 'started'))

        history = handler.get_history()
        assert [e['namespace'] for e in history] == ['exact', 'general']
        assert history[0]['message'] == 'solving'
        assert history[0]['level'] == 'INFO'

    def test_buffer_size(self):
        """Test only the newest records are kept."""
        handler = LogBufferHandler(buffer_size=3)
        for i in range(5):
            handler.emit(make_record('tcs.gen', f"m{i}"))

        assert [e['message'] for e in handler.get_history()] == ['m2', 'm3', 'm4']
        assert [e['message'] for e in handler.get_history(1)] == ['m4']

    def test_clear(self):
        """Test clearing the buffer."""
        handler = LogBufferHandler()
        handler.emit(make_record('tcs.heur', 'placed'))
        handler.clear_buffer()
        assert handler.get_history() == []

    def test_filter_by_namespace_and_level(self):
        """Test namespace and minimum level filters."""
        handler = LogBufferHandler()
        handler.emit(make_record('tcs.exact', 'start', logging.DEBUG))
        handler.emit(make_record('tcs.exact', 'done'))
        handler.emit(make_record('tcs.bench', 'unsound', logging.ERROR))

        assert [e['message'] for e in handler.get_history(namespace='exact')] == ['start', 'done']
        assert [e['message'] for e in handler.get_history(min_level='info')] == ['done', 'unsound']
        assert handler.get_history(namespace='bench', min_level='ERROR')[0]['level'] == 'ERROR'

    def test_unknown_level(self):
        """Test a level name that does not exist."""
        with pytest.raises(ValueError):
            LogBufferHandler().get_history(min_level='loud')

    def test_global_handler_is_shared(self):
        """Test get_buffer_handler returns one instance."""
        assert get_buffer_handler() is get_buffer_handler()


class TestLoggers:
    """Tests for namespace loggers and levels."""

    @pytest.fixture(autouse=True)
    def restore_logging(self):
        root = logging.getLogger()
        level, handlers = root.level, list(root.handlers)
        yield
        root.setLevel(level)
        root.handlers[:] = handlers

    def test_namespace_logger(self):
        """Test known namespaces map to tcs loggers."""
        assert get_logger(__name__, namespace='bench').name == 'tcs.bench'
        assert get_logger(__name__, namespace='unknown').name == __name__
        assert get_logger(__name__).name == __name__

    def test_every_module_namespace_is_known(self):
        """Test namespaces used by the package are registered."""
        assert {'model', 'validate', 'exact', 'heur', 'metrics', 'gen', 'bench', 'api'} <= set(NAMESPACES)

    def test_setup_logging_installs_buffer(self):
        """Test the buffer handler is attached to the root logger."""
        setup_logging(level=logging.WARNING)
        root = logging.getLogger()
        assert get_buffer_handler() in root.handlers
        assert root.level == logging.WARNING

    def test_set_log_level(self):
        """Test runtime level changes reach namespace loggers."""
        setup_logging(level=logging.INFO)
        set_log_level('debug')
        assert logging.getLogger().level == logging.DEBUG
        assert logging.getLogger('tcs.exact').level == logging.DEBUG
        set_log_level(logging.INFO)
        assert logging.getLogger('tcs.exact').level == logging.INFO
