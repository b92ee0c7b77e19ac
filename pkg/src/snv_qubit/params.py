"""Value types for emitter, drive, noise and readout parameters.

Fields are stored in the lab units used by the config file; the ``*_rad`` /
``*_s`` properties convert to the SI units used by the numerics.
"""

import math
from dataclasses import dataclass, replace
from typing import Optional, Tuple

import numpy as np

from snv_qubit.constants import MHZ, US


def _require_positive(name, value):
    if not value > 0:
        raise ValueError(f"{name} must be positive, got {value!r}")


def _require_nonnegative(name, value):
    if not value >= 0:
        raise ValueError(f"{name} must be non-negative, got {value!r}")


@dataclass(frozen=True)
class DeviceParams:
    """Emitter constants. Defaults are the measured values for the device."""

    lambda_so_ground: float = 850.0  # GHz
    lambda_so_excited: float = 3000.0  # GHz
    gamma: float = 35.0  # MHz, Gamma/2pi
    p_sat: float = 4.6  # nW
    eta: float = 80.0
    gyro_e: float = 27.99  # GHz/T
    t2_star: float = 1.3  # us
    hyperfine_a: float = 42.6  # MHz
    b_field: float = 0.2  # T
    b_polar: float = 54.7  # deg from the symmetry axis
    b_azimuth: float = 0.0  # deg

    def __post_init__(self):
        for name in (
            "lambda_so_ground",
            "lambda_so_excited",
            "gamma",
            "p_sat",
            "gyro_e",
            "t2_star",
        ):
            _require_positive(name, getattr(self, name))
        _require_nonnegative("hyperfine_a", self.hyperfine_a)
        _require_nonnegative("b_field", self.b_field)
        if not 0.0 <= self.b_polar <= 180.0:
            raise ValueError(f"b_polar must lie in [0, 180] deg, got {self.b_polar!r}")
        if not self.eta >= 1.0:
            raise ValueError(f"eta must be >= 1, got {self.eta!r}")

    @property
    def gamma_rad(self):
        return self.gamma * MHZ

    @property
    def t2_star_s(self):
        return self.t2_star * US

    @property
    def hyperfine_rad(self):
        return self.hyperfine_a * MHZ

    @property
    def b_vector(self):
        """Field components (Bx, By, Bz) in T, z along the symmetry axis."""
        theta = math.radians(self.b_polar)
        phi = math.radians(self.b_azimuth)
        return (
            self.b_field * math.sin(theta) * math.cos(phi),
            self.b_field * math.sin(theta) * math.sin(phi),
            self.b_field * math.cos(theta),
        )

    @property
    def b_perp(self):
        return self.b_field * abs(math.sin(math.radians(self.b_polar)))

    def replace(self, **changes):
        return replace(self, **changes)


@dataclass(frozen=True)
class JahnTellerStrain:
    """Orbital strain matrix [[a, c], [c, b]] in GHz."""

    a: float = 0.0
    b: float = 0.0
    c: float = 0.0

    def matrix(self):
        return np.array([[self.a, self.c], [self.c, self.b]], dtype=float)


@dataclass(frozen=True)
class RamanDriveParams:
    """One bichromatic Raman drive segment.

    ``rabi`` is an optional calibrated Rabi rate (MHz). When set it replaces
    the power-based estimate and the effective saturation parameter is
    inferred from it.
    """

    delta: float = 1200.0  # MHz, single-photon detuning
    two_photon_delta: float = 0.0  # MHz
    power: float = 0.0  # nW per sideband
    phase: float = 0.0  # rad
    duration: float = 0.0  # us
    serrodyne: float = 0.0  # MHz
    rabi: Optional[float] = None  # MHz

    def __post_init__(self):
        _require_nonnegative("power", self.power)
        _require_nonnegative("duration", self.duration)
        if self.rabi is not None:
            _require_nonnegative("rabi", self.rabi)

    @property
    def delta_rad(self):
        return self.delta * MHZ

    @property
    def two_photon_rad(self):
        return self.two_photon_delta * MHZ

    @property
    def duration_s(self):
        return self.duration * US

    def replace(self, **changes):
        return replace(self, **changes)


BATH_SHAPES = ("gaussian", "ou")


@dataclass(frozen=True)
class NoiseModel:
    """Dephasing and relaxation acting on the qubit (SI units)."""

    quasi_static_sigma: float = 0.0  # rad/s
    bath_sigma: float = 0.0  # rad/s
    bath_tau_c: float = 0.0  # s
    bath_shape: str = "gaussian"
    leak_dephasing: float = 0.0  # 1/s, during delays
    gamma1: float = 0.0  # 1/s

    def __post_init__(self):
        for name in ("quasi_static_sigma", "bath_sigma", "bath_tau_c", "leak_dephasing", "gamma1"):
            _require_nonnegative(name, getattr(self, name))
        if self.bath_sigma > 0 and self.bath_tau_c <= 0:
            raise ValueError("bath_tau_c must be positive when bath_sigma is set")
        if self.bath_shape not in BATH_SHAPES:
            raise ValueError(
                f"unknown bath shape '{self.bath_shape}', expected one of {', '.join(BATH_SHAPES)}"
            )

    @property
    def is_noiseless(self):
        return not (
            self.quasi_static_sigma or self.bath_sigma or self.leak_dephasing or self.gamma1
        )

    def replace(self, **changes):
        return replace(self, **changes)


@dataclass(frozen=True)
class NuclearSpinModel:
    """Classical mixture of the two nuclear projections shifting the spin splitting."""

    hyperfine_a: float = 42.6  # MHz
    populations: Tuple[float, float] = (0.5, 0.5)

    def __post_init__(self):
        _require_nonnegative("hyperfine_a", self.hyperfine_a)
        p_plus, p_minus = self.populations
        if p_plus < 0 or p_minus < 0 or not math.isclose(p_plus + p_minus, 1.0, abs_tol=1e-12):
            raise ValueError(f"nuclear populations must be >= 0 and sum to 1, got {self.populations!r}")

    def manifolds(self, centered=True):
        """Return ``[(shift_rad, weight), ...]`` for the two manifolds.

        Centered shifts are -A/2, +A/2 around the mean splitting; otherwise the
        lower resonance sits at 0 and the other at +A.
        """
        a = self.hyperfine_a * MHZ
        if centered:
            shifts = (-a / 2, a / 2)
        else:
            shifts = (0.0, a)
        return [(s, w) for s, w in zip(shifts, self.populations) if w > 0]


@dataclass(frozen=True)
class ReadoutModel:
    """Population readout: initialization infidelity and optional shot noise."""

    init_fidelity: float = 1.0
    shot_noise: bool = False
    counts: int = 15000

    def __post_init__(self):
        if not 0.5 <= self.init_fidelity <= 1.0:
            raise ValueError(f"init_fidelity must lie in [0.5, 1], got {self.init_fidelity!r}")
        if self.counts <= 0:
            raise ValueError(f"counts must be positive, got {self.counts!r}")

