"""Physical constants used across the toolkit (CODATA, via scipy).

Centralized so the pipeline can print the exact values into report
provenance.
"""

from scipy.constants import hbar as HBAR  # J s
from scipy.constants import k as K_B  # J / K
from scipy.constants import epsilon_0 as EPS0  # F / m

CONSTANTS_TABLE = {
    "hbar_J_s": HBAR,
    "k_B_J_per_K": K_B,
    "epsilon_0_F_per_m": EPS0,
}
