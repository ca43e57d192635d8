import logging
from logging.handlers import RotatingFileHandler

import numpy as np
import pytest

import config
import multi_threading
from config import get_kernel_config, get_logging_config, load_env_variables, setup_logging
from distmat import ValidationReport
from error_handling import (
    ConfigurationError, DegenerateVarianceError, EigensolverError, LsmatParseError, NotSymmetricHollowError,
    ResourceError, exit_code_for, report_cli_error,
)
from multi_threading import kernel_threads, max_threads, resolve_thread_count, run_chunked
from utils.helpers import checksums_agree, matrix_nbytes, resolve_dtype, summarize_timings


class TestKernelConfig:
    def test_defaults(self, monkeypatch):
        monkeypatch.delenv('DMK_THREADS', raising=False)
        assert get_kernel_config() == {'threads': 0, 'tile': 16, 'precision': 'f64'}

    def test_thread_override(self, monkeypatch):
        monkeypatch.setenv('DMK_THREADS', '2')
        assert get_kernel_config()['threads'] == 2

    @pytest.mark.parametrize('value', ['two', '-1', '1.5'])
    def test_bad_thread_value(self, monkeypatch, value):
        monkeypatch.setenv('DMK_THREADS', value)
        with pytest.raises(ConfigurationError):
            get_kernel_config()

    def test_env_file(self, tmp_path, monkeypatch):
        monkeypatch.setenv('DMK_THREADS', '9')
        monkeypatch.delenv('DMK_THREADS')
        env_file = tmp_path / '.env'
        env_file.write_text('DMK_THREADS=1\n', encoding='utf-8')
        assert load_env_variables(str(env_file)) is True
        assert get_kernel_config()['threads'] == 1
        assert load_env_variables(str(tmp_path / 'absent.env')) is False


class TestLoggingConfig:
    def test_defaults(self, monkeypatch):
        monkeypatch.delenv('DMK_LOG_FILE', raising=False)
        monkeypatch.delenv('DMK_LOG_LEVEL', raising=False)
        assert get_logging_config() == {'log_file': None, 'log_level': logging.INFO}

    def test_level_name(self, monkeypatch):
        monkeypatch.setenv('DMK_LOG_LEVEL', 'debug')
        assert get_logging_config()['log_level'] == logging.DEBUG

    def test_unknown_level(self, monkeypatch):
        monkeypatch.setenv('DMK_LOG_LEVEL', 'chatty')
        with pytest.raises(ConfigurationError):
            get_logging_config()

    def test_handlers_replaced(self, tmp_path):
        root = logging.getLogger()
        setup_logging(console_output=False)
        before = len(root.handlers)
        setup_logging(log_file=str(tmp_path / 'run.log'))
        assert len(root.handlers) == before + 2
        assert any(isinstance(h, RotatingFileHandler) for h in root.handlers)
        setup_logging(log_file=None, console_output=False)
        assert len(root.handlers) == before
        assert config._installed_handlers == []


class TestThreads:
    def test_resolution(self):
        assert resolve_thread_count(0) == max_threads()
        assert resolve_thread_count(1) == 1
        assert resolve_thread_count(max_threads() + 5) == max_threads()
        with pytest.raises(ValueError):
            resolve_thread_count(-2)

    def test_default_from_environment(self, monkeypatch):
        monkeypatch.setenv('DMK_THREADS', '1')
        assert resolve_thread_count() == 1

    def test_kernel_threads_restores(self):
        import numba
        before = numba.get_num_threads()
        with kernel_threads(1) as effective:
            assert effective == 1
            assert numba.get_num_threads() == 1
        assert numba.get_num_threads() == before

    def test_run_chunked_fills_every_slot(self):
        out = np.zeros(10)

        def task(index):
            out[index] = index * 2

        run_chunked(task, range(10), max_workers=4)
        np.testing.assert_array_equal(out, np.arange(10) * 2)

    def test_run_chunked_reraises(self, monkeypatch):
        monkeypatch.setattr(multi_threading, 'max_threads', lambda: 4)

        def task(index):
            if index == 3:
                raise RuntimeError("chunk 3 broke")

        with pytest.raises(RuntimeError, match="chunk 3"):
            run_chunked(task, range(6), max_workers=4)


class TestErrors:
    def test_exit_codes(self):
        report = ValidationReport(False, True, (0, 1))
        assert exit_code_for(NotSymmetricHollowError(report)) == 1
        assert exit_code_for(LsmatParseError("bad", line=2)) == 2
        assert exit_code_for(ConfigurationError("bad")) == 2
        assert exit_code_for(DegenerateVarianceError("flat")) == 3
        assert exit_code_for(EigensolverError('dense', 'no convergence')) == 3
        assert exit_code_for(ResourceError(2**30)) == 3
        assert exit_code_for(FileNotFoundError('x')) == 2
        assert exit_code_for(ZeroDivisionError()) == 3

    def test_parse_error_message(self):
        error = LsmatParseError("Non-numeric value 'x'", line=3, position=(1, 2))
        assert 'line 3' in str(error)
        assert 'row=1, col=2' in str(error)

    def test_report_is_logged(self, caplog):
        with caplog.at_level(logging.ERROR):
            code = report_cli_error(DegenerateVarianceError("y is constant"), 'mantel')
        assert code == 3
        assert "y is constant" in caplog.text
        assert "mantel" in caplog.text


class TestHelpers:
    def test_resolve_dtype(self):
        assert resolve_dtype('f32') == np.float32
        assert resolve_dtype('f64') == np.float64
        with pytest.raises(ValueError):
            resolve_dtype('f16')

    def test_summarize_timings(self):
        assert summarize_timings([3.0, 1.0, 2.0]) == (1.0, 2.0, 3.0)
        with pytest.raises(ValueError):
            summarize_timings([])

    def test_matrix_nbytes(self):
        assert matrix_nbytes(1024, np.float64) == 8 * 2**20
        assert matrix_nbytes(1024, np.float32) == 4 * 2**20

    def test_checksums_agree(self):
        assert checksums_agree(100.0, 100.0 + 1e-8, 1e-9)
        assert not checksums_agree(100.0, 100.1, 1e-9)
