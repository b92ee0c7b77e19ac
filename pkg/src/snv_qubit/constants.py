"""Units, basis ordering and fixed operators.

Everything inside the package works in SI: angular frequencies in rad/s,
times in s, rates in 1/s. Config files and CSV columns use the lab units
(GHz, MHz, nW, us, ms, T); convert at the boundary with the factors below,
e.g. ``omega = 3.6 * MHZ`` or ``tau_us = tau / US``.
"""

import numpy as np

TWO_PI = 2.0 * np.pi

# Angular frequency per lab-frequency unit.
GHZ = TWO_PI * 1e9
MHZ = TWO_PI * 1e6

# Time units.
S = 1.0
MS = 1e-3
US = 1e-6
NS = 1e-9

# Rates quoted per microsecond / millisecond.
PER_US = 1e6
PER_MS = 1e3

# Orbital (x) spin product basis used by every 4x4 Hamiltonian.
BASIS_LABELS = ("e+,up", "e+,down", "e-,up", "e-,down")

# Reference labels: which product state each eigenstate connects to at B = 0, c = 0.
GROUND_LABELS = {"1": 1, "2": 2, "3": 3, "4": 0}
EXCITED_LABELS = {"A": 1, "B": 2, "C": 3, "D": 0}

# Two-level qubit basis: index 0 = |up>, index 1 = |down>, so sigma_z|down> = -|down>.
UP = 0
DOWN = 1

IDENTITY2 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)

# Three-level lambda basis for CPT.
LAMBDA_DOWN = 0
LAMBDA_UP = 1
LAMBDA_EXCITED = 2

# Sentinel for quantities that diverge (branching ratio at the selection-rule limit,
# lifetimes at zero drive power).
EFFECTIVELY_INFINITE = float("inf")
