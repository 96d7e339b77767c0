"""Numerical tolerances and unit constants.

hbar and k_B default to 1.0; scenarios may override them per run.  The total
Hilbert-space dimension is capped (env QSCHOTTKY_MAX_DIM) because everything
here is dense.
"""

import os

HBAR_DEFAULT = 1.0
KB_DEFAULT = 1.0

# hermiticity drift accepted on construction (symmetrized away below this)
EPS_HERM = 1e-12
# eigenvalues above -EPS_PSD count as positive semidefinite
EPS_PSD = 1e-10
# eigenvalues at or below EPS_LOG are excluded from the support of log
EPS_LOG = 1e-14
# weight floor used inside logarithms (saturation, not a probability)
EPS_WEIGHT = 1e-300
# frame orthonormality: below EPS_FRAME ok, up to EPS_FRAME_REPAIR repaired
EPS_FRAME = 1e-10
EPS_FRAME_REPAIR = 1e-6

MAX_DIM_ENV = "QSCHOTTKY_MAX_DIM"
NO_NUMBA_ENV = "QSCHOTTKY_NO_NUMBA"


def max_dim() -> int:
    """Largest allowed total Hilbert-space dimension."""
    return int(os.environ.get(MAX_DIM_ENV, "64"))
