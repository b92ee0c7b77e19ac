"""Lambda-scheme drive -> effective two-level qubit quantities.

All closed forms take Gamma, Delta and Omega as angular rates (rad/s); the
resulting scattering rates are plain rates (1/s). With the device defaults
this reproduces Omega/2pi = 3.9 MHz and Gamma_os = 3.3 /us at 650 nW and
Delta/2pi = 1200 MHz.
"""

import logging
import math
from typing import NamedTuple

import numpy as np

from snv_qubit.constants import (
    EFFECTIVELY_INFINITE,
    MHZ,
    MS,
    PER_US,
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
)
from snv_qubit.params import RamanDriveParams
from snv_qubit.results import ScanResult

logger = logging.getLogger(__name__)

SPIN_SPLITTING_DIFF_MHZ = 610.0


class ScatteringRate(NamedTuple):
    gamma_os: float  # 1/s
    t1_os: float  # s
    t2_os: float  # s


class LambdaParams(NamedTuple):
    """Optical Rabi rates and decay of the three-level reduction (rad/s)."""

    omega1: float  # spin-conserving A1 field
    omega2: float  # spin-flipping A2 field
    gamma: float
    f: float  # probability of decay into the spin-flipped state


class AcStarkShift(NamedTuple):
    optical_rabi: float  # Omega_1, rad/s
    shift: float  # Delta_AC, rad/s


class EffectiveTwoLevel(NamedTuple):
    rabi: float  # MHz
    scatter: float  # 1/us
    ac_stark_diff: float  # MHz
    t1_os: float  # ms
    t2_os: float  # ms


class InitFidelity(NamedTuple):
    epsilon: float
    fidelity: float
    physical: bool


def _require_detuning(drive):
    if drive.delta == 0:
        raise ValueError(
            "single-photon detuning is zero; the two-level reduction does not apply, "
            "use the three-level CPT model (run_cpt)"
        )


def saturation(drive, dev):
    """Saturation parameter s, inferred from a calibrated Rabi rate when one is given."""
    if drive.rabi is None:
        return drive.power / dev.p_sat
    _require_detuning(drive)
    omega = drive.rabi * MHZ
    return omega * 4.0 * math.sqrt(dev.eta) * abs(drive.delta_rad) / dev.gamma_rad**2


def _warn_if_near_resonant(s, drive, dev):
    if abs(drive.delta_rad) <= math.sqrt(s) * dev.gamma_rad:
        logger.warning(
            "Delta/2pi = %.4g MHz is not large compared with sqrt(s)*Gamma; "
            "the effective two-level rates are only indicative",
            drive.delta,
        )


def effective_rabi_rate(drive, dev):
    """Omega = s Gamma^2 / (4 sqrt(eta) Delta), rad/s."""
    _require_detuning(drive)
    if drive.rabi is not None:
        return drive.rabi * MHZ
    s = saturation(drive, dev)
    _warn_if_near_resonant(s, drive, dev)
    return s * dev.gamma_rad**2 / (4.0 * math.sqrt(dev.eta) * abs(drive.delta_rad))


def scattering_rate(drive, dev):
    """Gamma_os = s Gamma^3 / (8 Delta^2) with T2,os = 1/Gamma_os and T1,os = eta/Gamma_os."""
    _require_detuning(drive)
    s = saturation(drive, dev)
    gamma_os = s * dev.gamma_rad**3 / (8.0 * drive.delta_rad**2)
    if gamma_os == 0:
        return ScatteringRate(0.0, EFFECTIVELY_INFINITE, EFFECTIVELY_INFINITE)
    return ScatteringRate(gamma_os, dev.eta / gamma_os, 1.0 / gamma_os)


def leakage_limits(power, detuning, dev):
    """T1/T2 limits set by a continuous leakage of ``power`` nW at ``detuning`` MHz."""
    return scattering_rate(RamanDriveParams(delta=detuning, power=power), dev)


def lambda_params(drive, dev):
    """Omega_1 = sqrt(s/2) Gamma, Omega_2 = Omega_1 / sqrt(eta)."""
    s = saturation(drive, dev)
    omega1 = math.sqrt(s / 2.0) * dev.gamma_rad
    return LambdaParams(
        omega1=omega1,
        omega2=omega1 / math.sqrt(dev.eta),
        gamma=dev.gamma_rad,
        f=1.0 / (1.0 + dev.eta),
    )


def dark_state(lp):
    """cos(theta)|down> - sin(theta)|up> in the (down, up, E) basis, tan(theta) = Omega1/Omega2."""
    theta = math.atan2(lp.omega1, lp.omega2)
    return np.array([math.cos(theta), -math.sin(theta), 0.0], dtype=complex)


def ac_stark(drive, dev, spin_splitting_diff=SPIN_SPLITTING_DIFF_MHZ, omega=None):
    """Differential light shift of the two qubit states.

    ``spin_splitting_diff`` is (omega_upup - omega_downdown)/2pi in MHz. Spin-flipping
    and far-detuned sideband contributions are neglected.
    """
    if drive.delta <= 0:
        raise ValueError(f"ac_stark needs a positive detuning, got {drive.delta} MHz")
    if omega is None:
        omega = effective_rabi_rate(drive, dev)
    delta1 = drive.delta_rad
    delta2 = delta1 + spin_splitting_diff * MHZ
    omega1 = math.sqrt(2.0 * delta1 * omega * math.sqrt(dev.eta))
    shift1 = (math.hypot(omega1, delta1) - delta1) / 2.0
    shift2 = (math.hypot(omega1, delta2) - delta2) / 2.0
    return AcStarkShift(omega1, shift1 - shift2)


def effective_two_level(drive, dev, spin_splitting_diff=SPIN_SPLITTING_DIFF_MHZ):
    omega = effective_rabi_rate(drive, dev)
    rates = scattering_rate(drive, dev)
    shift = ac_stark(drive, dev, spin_splitting_diff, omega=omega).shift if drive.delta > 0 else 0.0
    return EffectiveTwoLevel(
        rabi=omega / MHZ,
        scatter=rates.gamma_os / PER_US,
        ac_stark_diff=shift / MHZ,
        t1_os=rates.t1_os / MS,
        t2_os=rates.t2_os / MS,
    )


def two_level_hamiltonian(omega, delta, phase=0.0):
    """H = (Omega/2)(cos(phi) sx + sin(phi) sy) + (delta/2) sz, rad/s.

    Arguments broadcast; the result has shape ``broadcast + (2, 2)``.
    """
    omega, delta, phase = np.broadcast_arrays(
        np.asarray(omega, dtype=float), np.asarray(delta, dtype=float), np.asarray(phase, dtype=float)
    )
    drive = np.cos(phase)[..., None, None] * SIGMA_X + np.sin(phase)[..., None, None] * SIGMA_Y
    return 0.5 * omega[..., None, None] * drive + 0.5 * delta[..., None, None] * SIGMA_Z


def pi_half_duration(omega):
    if omega <= 0:
        raise ValueError("a pi/2 pulse needs a positive Rabi rate")
    return math.pi / (2.0 * omega)


def gate_fidelity(omega, gamma_os, t2_star):
    """Fidelity of a pi/2 rotation limited by scattering or dephasing.

    Args:
        omega: effective Rabi rate (rad/s)
        gamma_os: optical scattering rate (1/s)
        t2_star: inhomogeneous dephasing time (s), inf to ignore it

    Returns:
        F = (1 + exp(-1/Q))/2 with Q = (16/9) Omega / max(Gamma_os, 1/T2*),
        a float for scalar inputs and an array otherwise.
    """
    omega = np.asarray(omega, dtype=float)
    dephasing = 0.0 if np.isinf(t2_star) else 1.0 / t2_star
    gamma_tot = np.maximum(np.asarray(gamma_os, dtype=float), dephasing)
    with np.errstate(divide="ignore", invalid="ignore"):
        inv_q = np.where(gamma_tot > 0, gamma_tot / (16.0 / 9.0 * omega), 0.0)
    fidelity = 0.5 * (1.0 + np.exp(-inv_q))
    return float(fidelity) if fidelity.ndim == 0 else fidelity


def fidelity_ridge(s, dev):
    """Detuning (rad/s) where Gamma_os = 1/T2*, the optimum of the pi/2 fidelity."""
    return math.sqrt(s * dev.gamma_rad**3 * dev.t2_star_s / 8.0)


def fidelity_map(s_values, delta_values, dev):
    """pi/2 gate fidelity over a grid of saturation parameters and detunings (MHz)."""
    s = np.asarray(s_values, dtype=float)[:, None]
    delta = np.asarray(delta_values, dtype=float)[None, :] * MHZ
    omega = s * dev.gamma_rad**2 / (4.0 * math.sqrt(dev.eta) * delta)
    gamma_os = s * dev.gamma_rad**3 / (8.0 * delta**2)
    fidelity = gate_fidelity(omega, gamma_os, dev.t2_star_s)
    return ScanResult(
        axis_names=("s", "delta_MHz"),
        axes=(np.asarray(s_values, dtype=float), np.asarray(delta_values, dtype=float)),
        values=np.asarray(fidelity),
        value_name="fidelity",
    )


def init_rate(p, dev):
    """(Gamma/2) (s/(1+s)) / eta in 1/s."""
    s = np.asarray(p, dtype=float) / dev.p_sat
    rate = 0.5 * dev.gamma_rad * s / (1.0 + s) / dev.eta
    return float(rate) if rate.ndim == 0 else rate


def init_fidelity(first_bin, steady, background):
    """F = 1 - eps/2, eps = (steady - bg)/(first - bg)."""
    if not first_bin > background:
        raise ValueError(
            f"first bin ({first_bin}) must exceed the background ({background})"
        )
    epsilon = (steady - background) / (first_bin - background)
    physical = 0.0 <= epsilon <= 1.0
    if not physical:
        logger.warning("non-physical initialization ratio eps = %.4g", epsilon)
    return InitFidelity(epsilon, 1.0 - epsilon / 2.0, physical)
