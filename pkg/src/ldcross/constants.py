# constants.py

from __future__ import annotations

import textwrap

from ldcross.__about__ import __appname__

# app
DESC = 'Large-deviation rates and Monte Carlo ruin probabilities for conditionally Gaussian processes.'
HELP = DESC
HELP += textwrap.dedent(
    f"""

commands:
    rate <config>       compute the crossing rate I_phi by nested minimization
    validate <config>   estimate p_n by Monte Carlo and fit the LDP slope
    selftest            run the invariant suite on built-in configs

options:
    --seed <u64>        override the master seed of the config
    --grid <M>          override the grid size (power of two)
    --out <dir>         output directory (default: {__appname__.lower()}-results)
    --threads <k>       worker threads for Monte Carlo batches (validate)
    -v, --verbose       increase verbosity (use -v, -vv, or -vvv)"""
)
DEFAULT_OUTPUT = f'{__appname__.lower()}-results'

# kernels
A1_EPS = 1e-12
PSD_TOL = 1e-10
DEFAULT_ALPHA = 1e-3

# rkhs
JITTER_SCALE = 1e-10
DIVERGENCE_LIMIT = 1e6
STABILITY_RATIO = 1.5
STABILITY_FLOOR = 1e-9
INITIAL_VALUE_TOL = 1e-12

# priors
CLAMP_LIMIT = 1e-3
GAUSSIAN_BRACKET = 8.0

# crossing
DEFAULT_GRID = 256
DEFAULT_LEVEL = 1.0
SCAN_POINTS = 64
RATE_TOL = 1e-9
ARG_TOL = 1e-10
REFINE_LEVELS = 3
SCAN_AGREEMENT = 1e-6
MIN_HITS = 50
CONFIDENCE = 0.95

# simulate
DEFAULT_BATCH = 2048

# outputs
RATE_FILE = 'rate.txt'
PROFILE_FILE = 'profile.csv'
PATH_FILE = 'path.csv'
MC_FILE = 'mc.csv'
SERIES_FILE = 'series.csv'
SLOPE_FILE = 'slope.txt'
SEPARATOR = ':'
