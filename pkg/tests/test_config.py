"""
Package and configuration tests.
Path and .env are set in tests/conftest.py.
Run from project root: python -m pytest tests/ -v
"""


def test_imports():
    """Verify required packages are installed."""
    import dotenv
    import numpy
    import pydantic
    import scipy

    assert numpy
    assert scipy
    assert dotenv
    assert pydantic.VERSION.startswith("2.")


def test_config_loads():
    """Config reads operational knobs from the environment."""
    from pathlib import Path

    from landscape.config import DEFAULT_JOBS, DEFAULT_OUT_DIR, LOG_FORMAT, LOG_LEVEL

    assert LOG_LEVEL in ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")
    assert isinstance(DEFAULT_JOBS, int) and DEFAULT_JOBS >= 1
    assert isinstance(DEFAULT_OUT_DIR, Path)
    assert "%(levelname)s" in LOG_FORMAT


def test_jobs_default_to_cpu_count(monkeypatch):
    """LANDSCAPE_JOBS=0 means one batch worker per CPU."""
    import importlib
    import os

    import landscape.config

    monkeypatch.setenv("LANDSCAPE_JOBS", "0")
    try:
        assert importlib.reload(landscape.config).DEFAULT_JOBS == (os.cpu_count() or 1)
        monkeypatch.setenv("LANDSCAPE_JOBS", "3")
        assert importlib.reload(landscape.config).DEFAULT_JOBS == 3
    finally:
        monkeypatch.undo()
        importlib.reload(landscape.config)


def test_numerical_defaults():
    """Numerical defaults are constants, independent of the shell."""
    from landscape.config import (
        CONVERGENCE_THRESHOLD,
        DEFAULT_GRID_SIZE,
        MAX_REJECTIONS,
        MAX_RESTARTS,
        STALL_TOLERANCE,
        STALL_WINDOW,
    )

    assert DEFAULT_GRID_SIZE == 128
    assert CONVERGENCE_THRESHOLD == 1e-3
    assert STALL_WINDOW == 25 and STALL_TOLERANCE == 1e-12
    assert MAX_RESTARTS == 5
    assert MAX_REJECTIONS == 10**6


def test_error_hierarchy():
    """Every package error derives from LandscapeError; input errors are also ValueErrors."""
    from landscape.errors import (
        ControlDomainError,
        DegenerateInputError,
        IntegrationError,
        LandscapeError,
        RunAbortedError,
        StepLimitExceededError,
        StepUnderflowError,
    )

    assert issubclass(StepUnderflowError, IntegrationError)
    assert issubclass(StepLimitExceededError, IntegrationError)
    assert issubclass(IntegrationError, LandscapeError)
    assert issubclass(ControlDomainError, ValueError)
    assert issubclass(DegenerateInputError, ValueError)
    err = IntegrationError("stopped", 0.25)
    assert err.last_time == 0.25 and "0.25" in str(err)
    assert RunAbortedError("boom").record is None


def test_version():
    import landscape

    assert landscape.__version__
