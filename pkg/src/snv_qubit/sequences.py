"""Pulse sequences on the effective spin qubit and their Monte-Carlo simulation.

Shots are simulated in a batch: each coherent segment builds one 4x4
Liouvillian per shot (the detuning differs by the sampled noise) and applies
its exact exponential. The qubit Hamiltonian in the drive frame is

    H = (Omega/2)(cos(phi) sx + sin(phi) sy) + (d/2) sz

with d = qubit frequency - drive frequency. During delays the qubit frequency
carries the differential light shift -Delta_AC.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple, Optional, Tuple

import numpy as np
from scipy.linalg import expm

from snv_qubit.constants import DOWN, SIGMA_X, SIGMA_Z, UP, US
from snv_qubit.lindblad import liouvillian, unvec, vec
from snv_qubit.noise import point_rng, segment_detunings
from snv_qubit.params import NoiseModel, RamanDriveParams, ReadoutModel
from snv_qubit.raman import effective_rabi_rate, scattering_rate, two_level_hamiltonian

logger = logging.getLogger(__name__)


def _check_duration(duration):
    if not duration >= 0:
        raise ValueError(f"segment duration must be >= 0, got {duration!r}")


@dataclass(frozen=True)
class Stabilize:
    """Charge-state stabilization; no effect on the spin."""

    duration: float = 0.0  # us

    def __post_init__(self):
        _check_duration(self.duration)


@dataclass(frozen=True)
class Reset:
    """Optical pumping into |down>."""

    duration: float = 0.0

    def __post_init__(self):
        _check_duration(self.duration)


@dataclass(frozen=True)
class Initialize:
    """Optical pumping into |up> (up to the readout model's init fidelity)."""

    duration: float = 0.0

    def __post_init__(self):
        _check_duration(self.duration)


@dataclass(frozen=True)
class Raman:
    drive: RamanDriveParams

    @property
    def duration(self):
        return self.drive.duration


@dataclass(frozen=True)
class Delay:
    duration: float  # us

    def __post_init__(self):
        _check_duration(self.duration)


@dataclass(frozen=True)
class Readout:
    duration: float = 0.0

    def __post_init__(self):
        _check_duration(self.duration)


COHERENT = (Raman, Delay)


@dataclass(frozen=True)
class PulseSequence:
    segments: Tuple[object, ...]

    def __post_init__(self):
        segments = tuple(self.segments)
        readouts = [k for k, seg in enumerate(segments) if isinstance(seg, Readout)]
        if len(readouts) != 1:
            raise ValueError(f"a sequence needs exactly one Readout, got {len(readouts)}")
        if readouts[0] != len(segments) - 1:
            raise ValueError("Readout must be the last segment")
        object.__setattr__(self, "segments", segments)

    @property
    def duration(self):
        """Total length in us."""
        return sum(seg.duration for seg in self.segments)

    def coherent_durations(self):
        """Per-segment durations in s; zero for segments that do not evolve the spin."""
        return [seg.duration * US if isinstance(seg, COHERENT) else 0.0 for seg in self.segments]

    def last_raman(self):
        for k in range(len(self.segments) - 1, -1, -1):
            if isinstance(self.segments[k], Raman):
                return k
        raise ValueError("sequence has no Raman segment")


class PulseRates(NamedTuple):
    omega: float  # rad/s
    gamma1: float  # 1/s
    gamma2: float  # 1/s


def pulse_rates(drive, dev, noise):
    """Rabi rate and decay during a Raman pulse.

    Dephasing is Gamma_os, spin flips Gamma_os/eta on top of the intrinsic rate.
    """
    omega = effective_rabi_rate(drive, dev)
    gamma_os = scattering_rate(drive, dev).gamma_os
    return PulseRates(omega, noise.gamma1 + gamma_os / dev.eta, gamma_os)


def qubit_collapses(gamma1, gamma2):
    collapses = []
    if gamma1 > 0:
        collapses.append(math.sqrt(gamma1 / 2.0) * SIGMA_X)
    if gamma2 > 0:
        collapses.append(math.sqrt(gamma2 / 2.0) * SIGMA_Z)
    return collapses


def qubit_liouvillian(omega, detuning, phase, gamma1, gamma2):
    """Batched qubit Liouvillian; ``detuning`` (rad/s) may be an array of shots."""
    return liouvillian(two_level_hamiltonian(omega, detuning, phase), qubit_collapses(gamma1, gamma2))


def evolve_shots(states, sup, duration):
    """Apply exp(L t) to vectorized states of shape (shots, 4)."""
    if duration == 0:
        return states
    props = expm(sup * duration)
    if props.ndim == 2:
        return states @ props.T
    return np.einsum("mij,mj->mi", props, states)


def prepared_state(up_population, shots):
    rho = np.zeros((2, 2), dtype=complex)
    rho[UP, UP] = up_population
    rho[DOWN, DOWN] = 1.0 - up_population
    return np.tile(vec(rho), (shots, 1))


def down_population(states):
    return np.clip(unvec(states)[:, DOWN, DOWN].real, 0.0, 1.0)


def shot_statistics(populations):
    """Mean and standard error over the last axis."""
    populations = np.asarray(populations)
    shots = populations.shape[-1]
    mean = populations.mean(axis=-1)
    if shots < 2:
        return mean, np.zeros_like(mean)
    return mean, populations.std(axis=-1, ddof=1) / math.sqrt(shots)


def apply_readout(mean, stderr, readout, rng):
    """Poisson counting of initialization and readout fluorescence, if enabled.

    The measured |down> population is the ratio of readout to initialization counts.
    """
    if not readout.shot_noise:
        return mean, stderr
    mean = np.asarray(mean, dtype=float)
    init_counts = np.maximum(rng.poisson(readout.counts, mean.shape), 1)
    ro_counts = rng.poisson(readout.counts * np.clip(mean, 0.0, None))
    measured = ro_counts / init_counts
    counting = np.sqrt(np.clip(mean, 0.0, None) / readout.counts)
    return measured, np.hypot(stderr, counting)


class QubitSimulator:
    """Runs a PulseSequence for a batch of noise realizations.

    ``frame_detuning`` is the two-photon detuning delta = drive - qubit
    frequency (rad/s), ``qubit_shift`` a static shift of the qubit frequency
    (nuclear manifold), ``ac_stark`` the differential light shift seen during
    delays. ``rates`` replaces the drive-derived pulse rates.
    """

    def __init__(
        self,
        dev,
        noise=None,
        readout=None,
        frame_detuning=0.0,
        qubit_shift=0.0,
        ac_stark=0.0,
        rates: Optional[PulseRates] = None,
    ):
        self.dev = dev
        self.noise = noise or NoiseModel()
        self.readout = readout or ReadoutModel()
        self.frame_detuning = frame_detuning
        self.qubit_shift = qubit_shift
        self.ac_stark = ac_stark
        self.rates = rates
        self._rates_cache = {}

    def _rates(self, drive):
        if self.rates is not None:
            return self.rates
        key = (drive.delta, drive.power, drive.rabi)
        if key not in self._rates_cache:
            self._rates_cache[key] = pulse_rates(drive, self.dev, self.noise)
        return self._rates_cache[key]

    def _pulse(self, states, drive, offsets, phase):
        rates = self._rates(drive)
        detuning = self.qubit_shift + offsets - self.frame_detuning - drive.two_photon_rad
        sup = qubit_liouvillian(rates.omega, detuning, phase, rates.gamma1, rates.gamma2)
        return evolve_shots(states, sup, drive.duration_s)

    def _delay(self, states, duration, offsets):
        detuning = self.qubit_shift + offsets - self.frame_detuning - self.ac_stark
        sup = qubit_liouvillian(0.0, detuning, 0.0, self.noise.gamma1, self.noise.leak_dephasing)
        return evolve_shots(states, sup, duration * US)

    def _run(self, segments, first, states, offsets, shots, phase=None):
        for k, seg in enumerate(segments, start=first):
            if isinstance(seg, Reset):
                states = prepared_state(0.0, shots)
            elif isinstance(seg, Initialize):
                states = prepared_state(self.readout.init_fidelity, shots)
            elif isinstance(seg, Raman):
                use = seg.drive.phase if phase is None or k != first else phase
                states = self._pulse(states, seg.drive, offsets[:, k], use)
            elif isinstance(seg, Delay):
                states = self._delay(states, seg.duration, offsets[:, k])
        return states

    def run(self, sequence, rng, shots, final_phases=None):
        """|down> population per shot at the Readout.

        With ``final_phases`` the last Raman pulse is repeated for every phase
        on the same noise realization; the result then has shape
        (len(final_phases), shots).
        """
        if shots < 1:
            raise ValueError("shots must be >= 1")
        segments = sequence.segments
        offsets = segment_detunings(self.noise, sequence.coherent_durations(), rng, shots)
        # An unprepared spin is fully mixed.
        start = prepared_state(0.5, shots)
        if final_phases is None:
            return down_population(self._run(segments, 0, start, offsets, shots))

        split = sequence.last_raman()
        prefix = self._run(segments[:split], 0, start, offsets, shots)
        return np.array([
            down_population(self._run(segments[split:], split, prefix, offsets, shots, phase=phi))
            for phi in np.asarray(final_phases, dtype=float)
        ])


def rabi_populations(
    times,
    omega,
    gamma1,
    gamma2,
    noise=None,
    seed=0,
    shots=64,
    detuning=0.0,
    init_fidelity=1.0,
    threads=1,
):
    """Noise-averaged Rabi flop P_down(T) for explicit rates.

    ``times`` in s. Adds the slow depolarization response
    (1/4)(1 - exp(-T gamma1 / 2pi)) to the driven evolution. Each time point
    uses its own stream ``point_rng(seed, index)``.
    """
    noise = noise or NoiseModel()
    times = np.asarray(times, dtype=float)
    static_detuning = noise.quasi_static_sigma == 0 and noise.bath_sigma == 0
    n_shots = 1 if static_detuning else shots

    def point(i):
        t = times[i]
        rng = point_rng(seed, i)
        offsets = segment_detunings(noise, [t], rng, n_shots)[:, 0]
        sup = qubit_liouvillian(omega, offsets - detuning, 0.0, gamma1, gamma2)
        states = evolve_shots(prepared_state(init_fidelity, n_shots), sup, t)
        pops = down_population(states) + 0.25 * (1.0 - math.exp(-t * gamma1 / (2.0 * math.pi)))
        return shot_statistics(np.clip(pops, 0.0, 1.0))

    stats = map_points(point, times.size, threads)
    return np.array([s[0] for s in stats]), np.array([s[1] for s in stats])


def map_points(work, count, threads=1):
    """[work(0), ..., work(count-1)], optionally on a thread pool.

    Results do not depend on ``threads``: every point draws from its own stream.
    """
    if threads <= 1 or count <= 1:
        return [work(i) for i in range(count)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(work, range(count)))
