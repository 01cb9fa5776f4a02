"""Configuration module for tc-sched.

Centralizes all configuration constants and environment variables
to eliminate scattered magic numbers and duplicated settings.
"""

import os
from pathlib import Path


def _env_bool(name: str, default: bool) -> bool:
    return os.getenv(name, str(default)).lower() in ('1', 'true', 'yes')


# ============================================================================
# Schedule Shape
# ============================================================================

# Channels per time-slot when a taskset file does not say otherwise
DEFAULT_CHANNELS = int(os.getenv("TCS_CHANNELS", "3"))


# ============================================================================
# Exact Solver
# ============================================================================

# Per-instance wall-clock budget (seconds)
DEFAULT_TIMEOUT_SECONDS = float(os.getenv("TCS_TIMEOUT", "60"))

# Search nodes explored between two clock checks
DEADLINE_CHECK_INTERVAL = 256

# Seed used to break ties between equally constrained branching units
DEFAULT_BRANCHING_SEED = 0

# Divide the slot-change objective by the number of compared period pairs
OBJECTIVE_NORMALIZE = _env_bool("TCS_OBJECTIVE_NORMALIZE", True)


# ============================================================================
# Heuristic Scheduler
# ============================================================================

# Leaf slots tried per subperiod before a job instance is given up
LEAF_RETRIES = int(os.getenv("TCS_LEAF_RETRIES", "4"))


# ============================================================================
# Taskset Generator
# ============================================================================

HYPERPERIODS = (8, 12, 16, 25, 35)
DEPENDENCY_COUNTS = (9, 12, 16, 24)
JOB_COUNTS = (1, 3, 6)
TASK_COUNTS = (8, 12)

# Inclusive jitter range (time-slots); ages default to [1, job period]
DEFAULT_JITTER_RANGE = (0, 2)

# Attempts per taskset before a parameter combination is declared infeasible
GENERATOR_MAX_ATTEMPTS = 200


# ============================================================================
# Benchmarks
# ============================================================================

# Output root for corpora, CSV files and plots
DEFAULT_OUT_DIR = Path(os.getenv("TCS_OUT_DIR", "tcs-out"))

# Worker processes for corpus runs
DEFAULT_WORKERS = int(os.getenv("TCS_WORKERS", str(os.cpu_count() or 1)))

# Bins over the pair distribution range [0, 2]
HYPOTHESIS_BINS = 8

# Solve times below this count as fast in the runtime study (seconds)
HEURISTIC_FAST_SECONDS = 1.0

# Results database written next to the CSV files
RESULTS_DB_NAME = "results.db"

# Reproducibility record written next to the study outputs
RUN_MANIFEST_NAME = "manifest.json"


# ============================================================================
# Server Configuration
# ============================================================================

DEFAULT_HOST = os.getenv("TCS_HOST", "127.0.0.1")
DEFAULT_PORT = int(os.getenv("TCS_PORT", "8000"))
