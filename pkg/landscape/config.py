"""
Runtime configuration loaded from environment variables.

Only operational knobs (logging, parallelism, output location) come from .env;
numerical defaults are constants so that results never depend on the shell.
"""

import os
from pathlib import Path

from dotenv import load_dotenv

_BASE = Path(__file__).resolve().parent.parent
load_dotenv(_BASE / ".env")

# Operational
LOG_LEVEL: str = os.getenv("LANDSCAPE_LOG_LEVEL", "WARNING").upper()
# 0 or unset: one worker per CPU
DEFAULT_JOBS: int = int(os.getenv("LANDSCAPE_JOBS", "0")) or os.cpu_count() or 1
DEFAULT_OUT_DIR: Path = Path(os.getenv("LANDSCAPE_OUT_DIR", "out"))

LOG_FORMAT: str = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"

# Control discretization
DEFAULT_GRID_SIZE: int = 128
DEFAULT_FINAL_TIME: float = 1.0

# Integrator tolerances (inner t-integration)
DEFAULT_REL_TOL: float = 1e-8
DEFAULT_ABS_TOL: float = 1e-10
DEFAULT_MAX_STEPS: int = 100_000

# Homotopy flow
DEFAULT_BETA: float = 1.0
CONVERGENCE_THRESHOLD: float = 1e-3
STALL_WINDOW: int = 25
STALL_TOLERANCE: float = 1e-12
MAX_RESTARTS: int = 5

# Hill climbing
HILL_CLIMB_TRIES: int = 200
HILL_CLIMB_SIGMA_SCALE: float = 1e-3

# Certificates and system generation
RANK_SAFETY_FACTOR: float = 64.0
MAX_REJECTIONS: int = 10**6
AT_GOAL_DISTANCE: float = 1e-12
