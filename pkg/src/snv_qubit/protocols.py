"""Experiments on the SnV spin qubit, each as a scan over one or two axes.

Every protocol returns ScanResult(s) in lab units. Monte-Carlo protocols draw
each scan point from ``point_rng(seed, index)``, so results are identical for
any ``threads`` value.
"""

import logging
import math
from dataclasses import asdict
from typing import NamedTuple

import numpy as np

from snv_qubit.constants import LAMBDA_DOWN, LAMBDA_EXCITED, LAMBDA_UP, MHZ, MS, PER_US, US
from snv_qubit.lindblad import LindbladSystem, steady_state
from snv_qubit.models import extract_visibility, fit_exp_decay, fit_init_rates, ramsey_2d_values
from snv_qubit.noise import point_rng
from snv_qubit.params import NoiseModel, ReadoutModel
from snv_qubit.raman import ac_stark, init_rate, lambda_params
from snv_qubit.results import ScanResult
from snv_qubit.sequences import (
    Delay,
    Initialize,
    PulseSequence,
    QubitSimulator,
    Raman,
    Readout,
    Reset,
    apply_readout,
    map_points,
    pulse_rates,
    rabi_populations,
    shot_statistics,
)

logger = logging.getLogger(__name__)

DECOUPLING_KINDS = {
    # name: (number of pi pulses, pi-pulse phase)
    "hahn": (1, 0.0),
    "cpmg": (2, math.pi / 2.0),
}

# Separate stream for detector counting noise.
READOUT_STREAM = 2**31 - 1


class DecouplingResult(NamedTuple):
    scan: ScanResult
    visibility: ScanResult


class InitTraceResult(NamedTuple):
    traces: ScanResult
    rates: ScanResult
    fit: object


def _metadata(dev, seed=None, shots=None, **extra):
    meta = {"device": asdict(dev)}
    if seed is not None:
        meta["seed"] = seed
    if shots is not None:
        meta["shots"] = shots
    meta.update(extra)
    return meta


def _readout(mean, err, readout, seed):
    return apply_readout(mean, err, readout, point_rng(seed, READOUT_STREAM))


def _manifolds(nuc, centered):
    if nuc is None:
        return [(0.0, 1.0)]
    return nuc.manifolds(centered=centered)


def _with_pi_duration(drive, omega, area):
    """Drive whose duration gives rotation angle ``area`` at Rabi rate ``omega``."""
    if omega <= 0:
        raise ValueError("drive has zero Rabi rate; set power or rabi")
    return drive.replace(duration=area / omega / US)


def cpt_system(lp, delta, two_photon, ground_dephasing, ground_relaxation):
    """Three-level (down, up, E) Lindblad system in the rotating frame (rad/s)."""
    h = np.zeros((3, 3), dtype=complex)
    h[LAMBDA_DOWN, LAMBDA_DOWN] = -delta
    h[LAMBDA_UP, LAMBDA_UP] = -(delta + two_photon)
    h[LAMBDA_DOWN, LAMBDA_EXCITED] = h[LAMBDA_EXCITED, LAMBDA_DOWN] = lp.omega1 / 2.0
    h[LAMBDA_UP, LAMBDA_EXCITED] = h[LAMBDA_EXCITED, LAMBDA_UP] = lp.omega2 / 2.0

    def ket_bra(i, j):
        op = np.zeros((3, 3), dtype=complex)
        op[i, j] = 1.0
        return op

    collapses = [
        math.sqrt((1.0 - lp.f) * lp.gamma) * ket_bra(LAMBDA_DOWN, LAMBDA_EXCITED),
        math.sqrt(lp.f * lp.gamma) * ket_bra(LAMBDA_UP, LAMBDA_EXCITED),
    ]
    if ground_dephasing > 0:
        collapses.append(
            math.sqrt(ground_dephasing / 2.0)
            * (ket_bra(LAMBDA_DOWN, LAMBDA_DOWN) - ket_bra(LAMBDA_UP, LAMBDA_UP))
        )
    if ground_relaxation > 0:
        collapses.append(
            math.sqrt(ground_relaxation / 2.0)
            * (ket_bra(LAMBDA_DOWN, LAMBDA_UP) + ket_bra(LAMBDA_UP, LAMBDA_DOWN))
        )
    return LindbladSystem(h, tuple(collapses))


def run_cpt(
    scan_mhz,
    drive,
    dev,
    noise=None,
    nuc=None,
    ground_dephasing=None,
    ground_relaxation=None,
    threads=1,
):
    """Steady-state excited population vs two-photon detuning (MHz).

    Ground dephasing defaults to 1/T2*, ground relaxation to the noise
    model's gamma1. Nuclear manifolds shift the two-photon resonance by +-A/2.
    """
    noise = noise or NoiseModel()
    if ground_dephasing is None:
        ground_dephasing = 1.0 / dev.t2_star_s
    if ground_relaxation is None:
        ground_relaxation = noise.gamma1
    lp = lambda_params(drive, dev)
    scan = np.asarray(scan_mhz, dtype=float)
    manifolds = _manifolds(nuc, centered=True)

    def point(i):
        total = 0.0
        for shift, weight in manifolds:
            system = cpt_system(
                lp, drive.delta_rad, scan[i] * MHZ - shift, ground_dephasing, ground_relaxation
            )
            total += weight * steady_state(system)[LAMBDA_EXCITED, LAMBDA_EXCITED].real
        return total

    values = np.array(map_points(point, scan.size, threads))
    return ScanResult(
        axis_names=("two_photon_MHz",),
        axes=(scan,),
        values=values,
        value_name="rho_ee",
        metadata=_metadata(dev, ground_dephasing=ground_dephasing, ground_relaxation=ground_relaxation),
    )


def run_odmr(
    scan_mhz,
    drive,
    dev,
    noise=None,
    nuc=None,
    readout=None,
    seed=0,
    shots=64,
    threads=1,
):
    """|down> population after one Raman pulse vs two-photon detuning (MHz).

    A drive without duration gets a pi pulse.
    """
    noise = noise or NoiseModel()
    readout = readout or ReadoutModel()
    rates = pulse_rates(drive, dev, noise)
    if drive.duration == 0:
        drive = _with_pi_duration(drive, rates.omega, math.pi)
    sequence = PulseSequence((Initialize(), Raman(drive), Readout()))
    scan = np.asarray(scan_mhz, dtype=float)
    manifolds = _manifolds(nuc, centered=True)

    def point(i):
        rng = point_rng(seed, i)
        mean, var = 0.0, 0.0
        for shift, weight in manifolds:
            sim = QubitSimulator(dev, noise, readout, frame_detuning=scan[i] * MHZ, qubit_shift=shift)
            m, e = shot_statistics(sim.run(sequence, rng, shots))
            mean += weight * m
            var += (weight * e) ** 2
        return mean, math.sqrt(var)

    stats = map_points(point, scan.size, threads)
    mean, err = _readout(np.array([s[0] for s in stats]), np.array([s[1] for s in stats]), readout, seed)
    return ScanResult(
        axis_names=("two_photon_MHz",),
        axes=(scan,),
        values=mean,
        value_name="pop_down",
        stderr=err,
        metadata=_metadata(dev, seed, shots, pulse_us=drive.duration, rabi_MHz=rates.omega / MHZ),
    )


def run_rabi(
    times_us,
    drive,
    dev,
    noise=None,
    readout=None,
    seed=0,
    shots=64,
    rates=None,
    threads=1,
):
    """|down> population after a Raman pulse of length T (us) starting in |up>."""
    noise = noise or NoiseModel()
    readout = readout or ReadoutModel()
    rates = rates or pulse_rates(drive, dev, noise)
    times = np.asarray(times_us, dtype=float)
    mean, err = rabi_populations(
        times * US,
        rates.omega,
        rates.gamma1,
        rates.gamma2,
        noise=noise,
        seed=seed,
        shots=shots,
        detuning=drive.two_photon_rad,
        init_fidelity=readout.init_fidelity,
        threads=threads,
    )
    mean, err = _readout(mean, err, readout, seed)
    return ScanResult(
        axis_names=("T_us",),
        axes=(times,),
        values=mean,
        value_name="pop_down",
        stderr=err,
        metadata=_metadata(
            dev,
            seed,
            shots,
            rabi_MHz=rates.omega / MHZ,
            gamma1_per_us=rates.gamma1 / PER_US,
            gamma2_per_us=rates.gamma2 / PER_US,
        ),
    )


def run_phase_sweep(phis, drive, dev, noise=None, readout=None, seed=0, shots=64, threads=1):
    """pi/2 about x followed by pi/2 about an axis at phi."""
    noise = noise or NoiseModel()
    readout = readout or ReadoutModel()
    rates = pulse_rates(drive, dev, noise)
    half = _with_pi_duration(drive.replace(phase=0.0), rates.omega, math.pi / 2.0)
    phis = np.asarray(phis, dtype=float)
    sim = QubitSimulator(dev, noise, readout)

    def point(i):
        sequence = PulseSequence(
            (Initialize(), Raman(half), Raman(half.replace(phase=phis[i])), Readout())
        )
        return shot_statistics(sim.run(sequence, point_rng(seed, i), shots))

    stats = map_points(point, phis.size, threads)
    mean, err = _readout(np.array([s[0] for s in stats]), np.array([s[1] for s in stats]), readout, seed)
    return ScanResult(
        axis_names=("phi_rad",),
        axes=(phis,),
        values=mean,
        value_name="pop_down",
        stderr=err,
        metadata=_metadata(dev, seed, shots, t_pi_half_us=half.duration),
    )


def run_ramsey(
    taus_us,
    deltas_mhz,
    drive,
    serrodyne_mhz,
    dev,
    noise=None,
    readout=None,
    seed=0,
    shots=64,
    threads=1,
    ac_stark_mhz=None,
):
    """pi/2 - tau - pi/2(phi = omega_S tau) over a (delta, tau) grid.

    Free precession runs at -Delta_AC relative to the drive frame; the
    shift is computed from the drive unless ``ac_stark_mhz`` is given.
    """
    noise = noise or NoiseModel()
    readout = readout or ReadoutModel()
    rates = pulse_rates(drive, dev, noise)
    half = _with_pi_duration(drive.replace(phase=0.0, two_photon_delta=0.0), rates.omega, math.pi / 2.0)
    if ac_stark_mhz is None:
        shift = ac_stark(drive, dev, omega=rates.omega).shift
    else:
        shift = ac_stark_mhz * MHZ
    taus = np.asarray(taus_us, dtype=float)
    deltas = np.asarray(deltas_mhz, dtype=float)
    n_tau = taus.size
    sims = [
        QubitSimulator(dev, noise, readout, frame_detuning=d * MHZ, ac_stark=shift) for d in deltas
    ]

    def point(i):
        row, col = divmod(i, n_tau)
        tau = taus[col]
        phase = serrodyne_mhz * MHZ * tau * US
        sequence = PulseSequence(
            (Initialize(), Raman(half), Delay(tau), Raman(half.replace(phase=phase)), Readout())
        )
        return shot_statistics(sims[row].run(sequence, point_rng(seed, i), shots))

    stats = map_points(point, deltas.size * n_tau, threads)
    mean = np.array([s[0] for s in stats]).reshape(deltas.size, n_tau)
    err = np.array([s[1] for s in stats]).reshape(deltas.size, n_tau)
    mean, err = _readout(mean, err, readout, seed)
    logger.debug("ramsey: Delta_AC/2pi = %.4g MHz, t_pi/2 = %.4g us", shift / MHZ, half.duration)
    return ScanResult(
        axis_names=("delta_MHz", "tau_us"),
        axes=(deltas, taus),
        values=mean,
        value_name="pop_down",
        stderr=err,
        metadata=_metadata(
            dev,
            seed,
            shots,
            serrodyne_MHz=serrodyne_mhz,
            ac_stark_MHz=shift / MHZ,
            t_pi_half_us=half.duration,
            rabi_MHz=rates.omega / MHZ,
        ),
    )


def ramsey_closed_form_scan(
    taus_us,
    deltas_mhz,
    serrodyne_mhz,
    ac_stark_mhz,
    t2_star_us,
    t_pi_half_us,
    contrast=0.25,
    width_mhz=5.0,
    offset=0.5,
):
    """Closed-form Ramsey map on an arbitrary grid (no Monte Carlo)."""
    taus = np.asarray(taus_us, dtype=float)
    deltas = np.asarray(deltas_mhz, dtype=float)
    dd, tt = np.meshgrid(deltas, taus, indexing="ij")
    x = np.column_stack([tt.ravel(), dd.ravel()])
    values = ramsey_2d_values(
        x, ac_stark_mhz, contrast, width_mhz, offset, t2_star_us, t_pi_half_us, serrodyne_mhz
    )
    return ScanResult(
        axis_names=("delta_MHz", "tau_us"),
        axes=(deltas, taus),
        values=values.reshape(dd.shape),
        value_name="pop_down",
        metadata={"closed_form": True, "ac_stark_MHz": ac_stark_mhz, "serrodyne_MHz": serrodyne_mhz},
    )


def decoupling_sequence(kind, tau_us, half, pi):
    """pi/2 - [tau/2N - pi - tau/2N] x N - pi/2, delays edge to edge."""
    n_pulses, _ = DECOUPLING_KINDS[kind]
    gap = tau_us / (2 * n_pulses)
    segments = [Initialize(), Raman(half)]
    for _ in range(n_pulses):
        segments += [Delay(gap), Raman(pi), Delay(gap)]
    segments += [Raman(half), Readout()]
    return PulseSequence(tuple(segments))


def run_decoupling(
    kind,
    taus_us,
    phis,
    drive,
    dev,
    noise=None,
    readout=None,
    seed=0,
    shots=64,
    threads=1,
):
    """Hahn echo or CPMG-2 over (tau, phi) and the visibility per tau."""
    if kind not in DECOUPLING_KINDS:
        raise ValueError(f"unknown decoupling kind {kind!r}; expected one of {sorted(DECOUPLING_KINDS)}")
    noise = noise or NoiseModel()
    readout = readout or ReadoutModel()
    _, pi_phase = DECOUPLING_KINDS[kind]
    rates = pulse_rates(drive, dev, noise)
    half = _with_pi_duration(drive.replace(phase=0.0), rates.omega, math.pi / 2.0)
    pi = _with_pi_duration(drive.replace(phase=pi_phase), rates.omega, math.pi)
    taus = np.asarray(taus_us, dtype=float)
    phis = np.asarray(phis, dtype=float)
    sim = QubitSimulator(dev, noise, readout)

    def point(i):
        sequence = decoupling_sequence(kind, taus[i], half, pi)
        pops = sim.run(sequence, point_rng(seed, i), shots, final_phases=phis)
        return shot_statistics(pops)

    stats = map_points(point, taus.size, threads)
    mean = np.array([s[0] for s in stats])
    err = np.array([s[1] for s in stats])
    mean, err = _readout(mean, err, readout, seed)
    scan = ScanResult(
        axis_names=("tau_us", "phi_rad"),
        axes=(taus, phis),
        values=mean,
        value_name="pop_down",
        stderr=err,
        metadata=_metadata(dev, seed, shots, kind=kind, t_pi_us=pi.duration),
    )

    vis, vis_err = [], []
    for i in range(taus.size):
        sigma = err[i] if np.all(err[i] > 0) else None
        v = extract_visibility(phis, mean[i], sigma)
        vis.append(v.visibility)
        vis_err.append(v.error)
    visibility = ScanResult(
        axis_names=("tau_us",),
        axes=(taus,),
        values=np.array(vis),
        value_name="visibility",
        stderr=np.array(vis_err),
        metadata={"kind": kind},
    )
    return DecouplingResult(scan, visibility)


def run_t1(delays_ms, dev, noise=None, readout=None, seed=0):
    """Reset - initialize - wait - readout; populations need a single shot."""
    noise = noise or NoiseModel()
    readout = readout or ReadoutModel()
    delays = np.asarray(delays_ms, dtype=float)
    sim = QubitSimulator(dev, noise, readout)
    values = np.empty(delays.size)
    for i, delay in enumerate(delays):
        sequence = PulseSequence((Reset(), Initialize(), Delay(delay * MS / US), Readout()))
        values[i] = sim.run(sequence, point_rng(seed, i), 1)[0]
    mean, err = _readout(values, np.zeros_like(values), readout, seed)
    return ScanResult(
        axis_names=("delay_ms",),
        axes=(delays,),
        values=mean,
        value_name="pop_down",
        stderr=err,
        metadata=_metadata(dev, seed, 1, gamma1_per_ms=noise.gamma1 * MS),
    )


def run_init_trace(powers_nw, dev, times_us=None, readout=None, seed=0, background=141.0):
    """Fluorescence decay during initialization at each power and the rate fit.

    Each trace is counts(t) = A exp(-k t) + background with k = init_rate(p)
    and A proportional to s/(1+s). Per-trace exponential fits give k(p),
    which is then fitted with the saturation model for (p_sat, eta).
    """
    readout = readout or ReadoutModel()
    powers = np.asarray(powers_nw, dtype=float)
    times = np.linspace(0.0, 30.0, 301) if times_us is None else np.asarray(times_us, dtype=float)
    rng = point_rng(seed, READOUT_STREAM)

    traces = np.empty((powers.size, times.size))
    rates = np.empty(powers.size)
    rate_err = np.empty(powers.size)
    for i, p in enumerate(powers):
        s = p / dev.p_sat
        k = init_rate(p, dev) / PER_US
        expected = readout.counts * s / (1.0 + s) * np.exp(-k * times) + background
        counts = rng.poisson(expected).astype(float) if readout.shot_noise else expected
        traces[i] = counts
        sigma = np.sqrt(np.maximum(counts, 1.0)) if readout.shot_noise else None
        fit = fit_exp_decay(times, counts, sigma)
        rates[i] = 1.0 / fit["tau"]
        rate_err[i] = fit.error("tau") / fit["tau"] ** 2

    fit = None
    if powers.size >= 2:
        sigma = rate_err if np.all(rate_err > 0) else None
        fit = fit_init_rates(powers, rates, sigma, dev)
    return InitTraceResult(
        traces=ScanResult(
            axis_names=("power_nW", "t_us"),
            axes=(powers, times),
            values=traces,
            value_name="counts",
            metadata=_metadata(dev, seed, background=background),
        ),
        rates=ScanResult(
            axis_names=("power_nW",),
            axes=(powers,),
            values=rates,
            value_name="rate_per_us",
            stderr=rate_err,
        ),
        fit=fit,
    )


def run_sequence(
    sequence,
    dev,
    noise=None,
    readout=None,
    seed=0,
    shots=64,
    frame_detuning_mhz=0.0,
    ac_stark_mhz=0.0,
):
    """Mean |down> population and its standard error for a user-built sequence."""
    sim = QubitSimulator(
        dev,
        noise,
        readout,
        frame_detuning=frame_detuning_mhz * MHZ,
        ac_stark=ac_stark_mhz * MHZ,
    )
    mean, err = shot_statistics(sim.run(sequence, point_rng(seed, 0), shots))
    return float(mean), float(err)
