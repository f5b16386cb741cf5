"""
Default settings for rmhd-esdg.
Numerical defaults, output naming and report styling.
"""

# Discretisation
DEFAULT_DEGREE = 2
DEFAULT_CFL = 0.2  # CFL number used by every experiment
DEFAULT_FLUX = "es"
LOG_EVERY = 100  # steps between progress lines

# Limiters
DEFAULT_TVB_M = 10.0
DEFAULT_KXRCF_THRESHOLD = 1.0
DEFAULT_PCP_EPSILON = 1e-13

# Entropy monitoring
ENTROPY_SLACK = 1e-12  # relative rise tolerated between accepted steps

# Flux property suite
DEFAULT_SEED = 1234
DEFAULT_SAMPLES = 10000
FLUXCHECK_TOL = 1e-11
FLUXCHECK_ES_SLACK = 1e-12
FLUXCHECK_SBP_TOL = 1e-14
FLUXCHECK_DEGREES = (1, 2, 3, 4)

# Convergence ladders
DEFAULT_LADDERS = {
    "alfven1d": (20, 40, 80, 160),
    "alfven2d": (10, 20, 40),
    "vortex": (20, 40, 80),
}
FALLBACK_LADDER = (10, 20, 40)

# Files and storage
DEFAULT_OUT_DIR = "runs"
DB_FILE = "rmhd_runs.db"
DEFAULT_DATABASE_URL = f"sqlite:///{DB_FILE}"
PROFILE_SUFFIX = "_profile.csv"
GRID_SUFFIX = "_grid.csv"
ENTROPY_SUFFIX = "_entropy.csv"
CONVERGENCE_SUFFIX = "_convergence.csv"

# Report colours
REPORT_TITLE_COLOR = "#003449"
REPORT_ACCENT_COLOR = "#00A6A6"
REPORT_TEXT_COLOR = "#1A2B3C"
REPORT_GRID_COLOR = "#E2E8F0"
REPORT_WARNING_COLOR = "#E53E3E"
