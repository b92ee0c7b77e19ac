"""Classical detuning noise and the per-point random streams.

The qubit frequency fluctuates by a stationary Gaussian bath (stationary std
sigma, correlation time tau_c) plus an optional quasi-static Gaussian offset
that is constant over a shot. A shot is a piecewise-constant Hamiltonian:
every coherent segment sees the mean of the bath over its own duration.

Two bath shapes are available. The default ``gaussian`` bath has correlation
sigma^2 exp(-(t/tau_c)^2), the smooth spectral diffusion of a slowly evolving
nuclear-spin bath; each shot is a sum of random Fourier modes, so segment
means are integrated in closed form. The ``ou`` bath is an
Ornstein-Uhlenbeck process with correlation sigma^2 exp(-|t|/tau_c); its
segment means are approximated by a trapezoid rule over OU_SUBSTEPS exact
updates of the process.
"""

import logging
import math

import numpy as np

from snv_qubit.params import NoiseModel, RamanDriveParams
from snv_qubit.raman import scattering_rate

logger = logging.getLogger(__name__)

HAHN_T2 = 28.3e-6  # s
OU_SUBSTEPS = 8
BATH_MODES = 64


def quasi_static_sigma(t2_star):
    """sigma giving exp(-(tau/T2*)^2) after Gaussian averaging of cos(delta tau)."""
    return math.sqrt(2.0) / t2_star


def tau_c_for_hahn(t2_hahn, sigma, shape="gaussian"):
    """Slow-bath correlation time giving a Hahn decay time ``t2_hahn``.

    Gaussian bath: T2 = (16 tau_c^2 / sigma^2)^(1/4), a decay exp(-(tau/T2)^4).
    OU bath: T2 = (12 tau_c / sigma^2)^(1/3), a decay exp(-(tau/T2)^3).
    """
    if shape == "gaussian":
        return t2_hahn**2 * sigma / 4.0
    if shape == "ou":
        return t2_hahn**3 * sigma**2 / 12.0
    raise ValueError(f"unknown bath shape '{shape}'")


def default_tau_c(dev, shape="gaussian"):
    return tau_c_for_hahn(HAHN_T2, quasi_static_sigma(dev.t2_star_s), shape)


def noise_model(
    dev,
    bath=True,
    bath_tau_c=None,
    bath_shape="gaussian",
    quasi_static=0.0,
    leak_power=0.0,
    leak_detuning=1200.0,
    intrinsic_gamma1=0.0,
):
    """NoiseModel from device constants and a laser-leakage level.

    ``leak_power`` (nW) at ``leak_detuning`` (MHz) dephases the spin at
    Gamma_os during delays and relaxes it at Gamma_os/eta.
    ``quasi_static`` is an extra static std in rad/s.
    """
    sigma = quasi_static_sigma(dev.t2_star_s) if bath else 0.0
    tau_c = 0.0
    if bath:
        tau_c = bath_tau_c if bath_tau_c is not None else default_tau_c(dev, bath_shape)
    leak = 0.0
    gamma1 = intrinsic_gamma1
    if leak_power > 0:
        rates = scattering_rate(RamanDriveParams(delta=leak_detuning, power=leak_power), dev)
        leak = rates.gamma_os
        gamma1 += rates.gamma_os / dev.eta
        logger.debug("leakage %.3g nW: T2 limit %.4g s, T1 limit %.4g s", leak_power, rates.t2_os, rates.t1_os)
    return NoiseModel(
        quasi_static_sigma=quasi_static,
        bath_sigma=sigma,
        bath_tau_c=tau_c,
        bath_shape=bath_shape,
        leak_dephasing=leak,
        gamma1=gamma1,
    )


def point_rng(seed, index):
    """Independent stream for scan point ``index``; schedule-independent."""
    return np.random.default_rng([int(seed), int(index)])


def segment_detunings(noise, durations, rng, shots):
    """Mean detuning offset (rad/s) per shot and segment, shape (shots, segments).

    ``durations`` are in seconds; zero-length segments see the current value
    of the bath without advancing it.
    """
    durations = np.asarray(durations, dtype=float)
    offsets = np.zeros((shots, durations.size))
    if noise.quasi_static_sigma > 0:
        offsets += rng.normal(0.0, noise.quasi_static_sigma, shots)[:, None]
    if noise.bath_sigma <= 0:
        return offsets
    if noise.bath_shape == "gaussian":
        offsets += _gaussian_bath_means(noise, durations, rng, shots)
    else:
        offsets += _ou_bath_means(noise, durations, rng, shots)
    return offsets


def _gaussian_bath_means(noise, durations, rng, shots):
    # Mode frequencies ~ N(0, 2/tau_c^2) reproduce exp(-(t/tau_c)^2) on average.
    omega = rng.normal(0.0, math.sqrt(2.0) / noise.bath_tau_c, (shots, BATH_MODES))
    amplitude = noise.bath_sigma / math.sqrt(BATH_MODES)
    a = rng.normal(0.0, amplitude, (shots, BATH_MODES))
    b = rng.normal(0.0, amplitude, (shots, BATH_MODES))
    means = np.empty((shots, durations.size))
    start = 0.0
    for k, duration in enumerate(durations):
        duration = max(duration, 0.0)
        phase = omega * (start + 0.5 * duration)
        # Mean of cos/sin over the segment is the midpoint value times sinc.
        window = np.sinc(omega * duration / (2.0 * math.pi))
        means[:, k] = np.sum(window * (a * np.cos(phase) + b * np.sin(phase)), axis=1)
        start += duration
    return means


def _ou_bath_means(noise, durations, rng, shots):
    sigma = noise.bath_sigma
    means = np.empty((shots, durations.size))
    x = rng.normal(0.0, sigma, shots)
    for k, duration in enumerate(durations):
        if duration <= 0:
            means[:, k] = x
            continue
        h = duration / OU_SUBSTEPS
        decay = math.exp(-h / noise.bath_tau_c)
        kick = sigma * math.sqrt(1.0 - decay * decay)
        total = 0.5 * x
        for step in range(OU_SUBSTEPS):
            x = decay * x + kick * rng.standard_normal(shots)
            total = total + (0.5 * x if step == OU_SUBSTEPS - 1 else x)
        means[:, k] = total / OU_SUBSTEPS
    return means
