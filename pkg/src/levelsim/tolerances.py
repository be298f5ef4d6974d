"""Declared tolerances and default workloads for every shipped check.

Single source of truth: the command-line experiments and the acceptance test
suite both read these values, so a tolerance can never drift between what is
promised and what is tested. Names group by check number C1..C13.
"""

from __future__ import annotations

# C1: rate-function certification
RATE_QUERIES = 100
RATE_VALUE_TOL = 1e-6
RATE_RESIDUAL_TOL = 1e-9

# C2: branching-bound sweep
GW_SWEEP_REPLICAS = 10_000
GW_SIGMA = 2.0

# C3: first moments of the branching diffusion
BBM_MEAN_T = 5.0
BBM_MEAN_REPLICAS = 10_000
BBM_COUNT_T = 6.0
BBM_COUNT_XS = (0.3, 0.8)
BBM_COUNT_REPLICAS = 10_000
MEAN_SIGMA = 3.0

# C4: growth exponent of level counts
BIGGINS_T = 12.0
BIGGINS_X = 0.5
BIGGINS_REPLICAS = 200
BIGGINS_TOL = 0.10

# C5: decay of the maximum's tail
MAX_TAIL_X = 1.6
MAX_TAIL_TS = (4.0, 6.0, 8.0)
MAX_TAIL_REPLICAS = 20_000
MAX_TAIL_TOL = 0.25

# C6: capped-system dominance
NBBM_T = 6.0
NBBM_CAPS = (10, 100)
NBBM_REPLICAS = 1_000
NBBM_SNAPSHOTS = (1.5, 3.0, 4.5, 6.0)

# C7: field sampler vs covariance oracle
COV_GRID_N = 32
COV_SAMPLES = 20_000
COV_PAIRS = 200
COV_SIGMA = 4.0
KS_LEVEL = 0.01

# C8: log growth of the on-diagonal Green's function
GREEN_SIZES = (32, 64, 128, 256)
GREEN_SLOPE_REL_TOL = 0.10

# C9: level-set exponents
DAVIAUD_ETA = 0.3
DAVIAUD_SIZES = (64, 128, 256, 512)
DAVIAUD_REPLICAS = {64: 2000, 128: 1500, 256: 1000, 512: 600}
DAVIAUD_MEAN_N = 128
DAVIAUD_TOL = 0.30

# C10: partition geometry
GEOMETRY_N = 64
COVER_CASES = ((64, 1), (64, 2), (256, 1), (256, 2))

# C11: harmonic decomposition
DECOMP_N = 256
DECOMP_SAMPLES = 800
DECOMP_VAR_REL_TOL = 0.25
MEAN_VALUE_TOL = 1e-10

# C12: coarse exceedance tail
COARSE_ZETA = 0.0
COARSE_B = 1.05
COARSE_SIZES = (64, 128)
COARSE_REPLICAS = 100_000
COARSE_TOL = 0.15

# C13: determinism
DETERMINISM_CONCURRENCY = 4

CHECK_NAMES = {
    1: "rate-function certification",
    2: "branching bound never violated",
    3: "branching first moments",
    4: "level-count growth exponent",
    5: "maximum tail decay",
    6: "capped-system dominance",
    7: "field sampler exactness",
    8: "Green diagonal growth",
    9: "level-set exponent trend",
    10: "partition geometry",
    11: "harmonic decomposition variance",
    12: "coarse tail probe",
    13: "deterministic reports",
}
