"""
Pytest configuration and fixtures for the control landscape explorer.
Ensures project root is on sys.path so tests can import landscape.odeint,
landscape.cli, etc.
"""

import os
import sys

import numpy as np
import pytest
from dotenv import load_dotenv

# Resolve project root: conftest.py lives in tests/, so parent is project root.
# This makes "landscape" importable regardless of cwd.
_current_file = os.path.realpath(__file__)
_conftest_dir = os.path.dirname(_current_file)
_project_root = os.path.dirname(_conftest_dir)

if _project_root not in sys.path:
    sys.path.insert(0, _project_root)

# Load .env so LANDSCAPE_* settings (jobs for the slow batch) are visible
_env_path = os.path.join(_project_root, ".env")
load_dotenv(_env_path)


@pytest.fixture
def rng():
    return np.random.default_rng(20240501)


@pytest.fixture
def rotation_system():
    """Harmonic oscillator driven on the velocity: controllable planar LTI system."""
    from landscape.system import NonlinearSystem

    return NonlinearSystem.linear(np.array([[0.0, 1.0], [-1.0, 0.0]]), np.array([0.0, 1.0]))


@pytest.fixture
def certified_trig_system():
    """A generated TrigSystem that passed the certificate filter."""
    from landscape.experiment import generate_system

    sys_, _ = generate_system(np.random.default_rng(7))
    return sys_


@pytest.fixture
def fast_flow():
    """Default flow with a short rescue budget."""
    from landscape.optimize import FlowConfig, HillClimbConfig

    return FlowConfig(max_restarts=2, hill_climb=HillClimbConfig(max_tries=50))
