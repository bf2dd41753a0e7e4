# locscale/common/config.py

import os
from pathlib import Path
from dotenv import load_dotenv, find_dotenv

# Find the .env file by searching upwards from the working directory and
# load it into the environment of this process. Anything already exported
# in the shell wins over the file.
load_dotenv(find_dotenv(usecwd=True))

PROJECT_ROOT = Path(__file__).resolve().parent.parent.parent

# Parallelism cap for per-point work. 0 means "use every core".
LOCSCALE_THREADS = int(os.getenv("LOCSCALE_THREADS", "0"))

LOG_DIR = Path(os.getenv("LOCSCALE_LOG_DIR", str(PROJECT_ROOT / "logs")))
LOG_TO_FILE = os.getenv("LOCSCALE_LOG_TO_FILE", "1") == "1"
LOG_LEVEL = os.getenv("LOCSCALE_LOG_LEVEL", "INFO").upper()

# Numerical defaults shared by the kernel and scale-axis code.
DEFAULT_BASE = float(os.getenv("LOCSCALE_BASE", "2"))
DEFAULT_EPS_TRUNC = float(os.getenv("LOCSCALE_EPS_TRUNC", "1e-12"))
DEFAULT_BOUNDARY = os.getenv("LOCSCALE_BOUNDARY", "periodic")

# Truncated kernels are evaluated out to this multiple of r_max(t); the
# margin covers the polynomial factor of the derivative kernels.
QUADRATURE_MARGIN = 1.5


def thread_count() -> int:
    """Resolves LOCSCALE_THREADS into an actual worker count (always >= 1)."""
    if LOCSCALE_THREADS > 0:
        return LOCSCALE_THREADS
    return os.cpu_count() or 1
