"""
Constants and defaults shared across pytobit.

Everything that a run can override (seed, replication counts, sample lengths) has its default
here, so that the CLI, the library functions and the tests all agree on what "default" means.
"""

### RANDOM NUMBERS ################################################################################

# Master seed used whenever a caller does not supply one. Echoed into every output.
DEFAULT_SEED = 20240611

# Substream identifiers, so that different uses of the same master seed never share draws.
STREAM_FINITE_NULL = 0
STREAM_LIMIT_DRAWS = 1
STREAM_BOOTSTRAP = 2
STREAM_EXPLOSION_PROBE = 3
STREAM_SIMULATE = 4

VALID_INNOVATION_LAWS = ['normal', 'student_t', 'rademacher']

# Degrees of freedom of the Student-t innovation law (rescaled to unit variance)
STUDENT_T_DF = 5.0

### MONTE CARLO ###################################################################################

DEFAULT_TABULATION_T = 100_000
DEFAULT_TABULATION_REPLICATIONS = 100_000
DEFAULT_EXPERIMENT_T = 1_000
DEFAULT_EXPERIMENT_REPLICATIONS = 100_000
DEFAULT_SIM_PVALUE_REPLICATIONS = 10_000
DEFAULT_SIM_PVALUE_T = 100_000
DEFAULT_BOOTSTRAP_REPLICATIONS = 499
DEFAULT_LIMIT_GRID = 10_000

# Replications handed to a worker at a time; also the granularity of progress logging
DEFAULT_CHUNK_SIZE = 500

VALID_LEVELS = [1, 5, 10]
LEVEL_QUANTILES = {1: 0.01, 5: 0.05, 10: 0.10}

# Default ratio grid of the critical-value table: 0.0, 0.1, ..., 2.0 and 2.5
DEFAULT_RATIO_GRID = [round(0.1 * i, 1) for i in range(21)] + [2.5]

# Evaluation grid for t-statistic CDFs and densities
DIST_GRID_MIN = -7.0
DIST_GRID_MAX = 4.0
DIST_GRID_POINTS = 221

### ESTIMATION ####################################################################################

# Gram matrices with a larger condition number are solved by QR of the design instead
GRAM_CONDITION_THRESHOLD = 1e12

# Relative size of the smallest R diagonal below which a design is declared singular
QR_RANK_TOLERANCE = 1e-10

# Residual standard deviation (relative to the response scale) treated as an exact fit
EXACT_FIT_TOLERANCE = 1e-12

DEFAULT_K_MAX = 15
VALID_CRITERIA = ['aic', 'bic']

### STABILITY #####################################################################################

DEFAULT_JSR_DEPTH = 12
DEFAULT_JSR_TOLERANCE = 1e-3
# Hard cap on the number of products kept alive at one depth of the branch-and-bound
MAX_JSR_PRODUCTS = 200_000

DEFAULT_EXPLOSION_T = 1_000
DEFAULT_EXPLOSION_REPLICATIONS = 50
EXPLOSION_GROWTH_THRESHOLD = 10.0
EXPLOSION_SHARE_THRESHOLD = 0.5

### DATA SOURCES ##################################################################################

ECB_BASE_URL = 'https://data-api.ecb.europa.eu/service/data'
ECB_PORTAL_URL = 'https://data.ecb.europa.eu'
ECB_TIMEOUT_SECONDS = 30
ECB_RETRIES = 1
ECB_USER_AGENT = 'pytobit/0.1 (SDMX-REST client)'

# Environment variable naming the directory where raw ECB responses are cached
CACHE_DIR_ENV = 'PYTOBIT_CACHE_DIR'

# The series and period of the Swiss franc floor
CHF_EUR_KEY = 'EXR.D.CHF.EUR.SP00.A'
CHF_FLOOR_START = '2011-09-06'
CHF_FLOOR_END = '2015-01-15'
CHF_FLOOR_LEVEL = 1.20

### OUTPUT ########################################################################################

SCHEMA_VERSION = 'v1'
