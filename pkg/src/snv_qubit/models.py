"""Fit models used to analyse the experiments, plus per-experiment fit helpers.

Units follow the CSV columns: times in us, frequencies in MHz (cycles, not
rad), rates in 1/us, powers in nW.
"""

import logging
import math
from typing import NamedTuple

import numpy as np

from snv_qubit.constants import MHZ, PER_US, TWO_PI, US
from snv_qubit.fitting import FitModel, Parameter, least_squares
from snv_qubit.params import NoiseModel
from snv_qubit.sequences import rabi_populations

logger = logging.getLogger(__name__)

POSITIVE = (0.0, None)
EXPONENT_BOUNDS = (0.3, 6.0)


class Visibility(NamedTuple):
    visibility: float
    error: float
    amplitude: float
    offset: float


def _sorted(x, y):
    order = np.argsort(x)
    return np.asarray(x, dtype=float)[order], np.asarray(y, dtype=float)[order]


def _spacing(x):
    diffs = np.diff(np.unique(x))
    return float(np.median(diffs)) if diffs.size else 1.0


def _fwhm(x, signal, peak):
    half = signal[peak] / 2.0
    lo = peak
    while lo > 0 and signal[lo] > half:
        lo -= 1
    hi = peak
    while hi < signal.size - 1 and signal[hi] > half:
        hi += 1
    return max(float(x[hi] - x[lo]), 2.0 * _spacing(x))


def _decay_time(x, y, level):
    """First x where y drops below ``level``; the last x if it never does."""
    below = np.nonzero(y < level)[0]
    if below.size == 0:
        return float(x[-1])
    k = int(below[0])
    if k == 0:
        return float(x[min(1, x.size - 1)])
    x0, x1, y0, y1 = x[k - 1], x[k], y[k - 1], y[k]
    return float(x0 + (level - y0) * (x1 - x0) / (y1 - y0))


def _dominant_frequency(x, y, oversample=16):
    """Peak of the zero-padded periodogram of a uniformly sampled trace."""
    dt = _spacing(x)
    size = oversample * x.size
    spectrum = np.abs(np.fft.rfft(y - y.mean(), n=size))
    freqs = np.fft.rfftfreq(size, dt)
    spectrum[0] = 0.0
    return float(freqs[int(np.argmax(spectrum))])


# -- model functions ---------------------------------------------------------


def lorentzian_pair_values(x, c1, c2, w1, w2, a1, a2, offset):
    def peak(center, width, amp):
        half = width / 2.0
        return amp * half**2 / ((x - center) ** 2 + half**2)

    return offset + peak(c1, w1, a1) + peak(c2, w2, a2)


def ramsey_fringe_values(tau, amplitude, t2_star, frequency, phase, offset):
    return amplitude * np.exp(-((tau / t2_star) ** 2)) * np.sin(TWO_PI * frequency * tau + phase) + offset


def stretched_exp_values(tau, v0, t2, n, v_inf):
    return v0 * np.exp(-((tau / t2) ** n)) + v_inf


def ramsey_2d_values(x, ac_stark, contrast, width, offset, t2_star, t_pi_half, serrodyne):
    """Two-axis Ramsey map; ``x`` columns are (tau_us, delta_MHz).

    Fringes run at serrodyne + delta + ac_stark with a phase 2 delta t_pi/2
    picked up during the pulses and a Lorentzian loss of pulse fidelity off
    resonance.
    """
    x = np.asarray(x, dtype=float)
    tau, delta = x[:, 0], x[:, 1]
    pulse = 1.0 / (1.0 + (delta / width) ** 2)
    fringe = np.cos(TWO_PI * (serrodyne + delta + ac_stark) * tau + 2.0 * TWO_PI * delta * t_pi_half)
    return offset + contrast * pulse * np.exp(-((tau / t2_star) ** 2)) * fringe


def saturation_rate_values(p, p_sat, eta, gamma):
    """Initialization rate (1/us) at power p; ``gamma`` is Gamma in rad/us."""
    s = p / p_sat
    return 0.5 * gamma * s / (1.0 + s) / eta


# -- guesses -----------------------------------------------------------------


def _guess_lorentzian_pair(x, y):
    x, y = _sorted(x, y)
    offset = float(np.median(y))
    signal = y - offset
    first = int(np.argmax(signal))
    span = x[-1] - x[0]
    masked = np.where(np.abs(x - x[first]) > span / 8.0, signal, -np.inf)
    second = int(np.argmax(masked))
    (c1, k1), (c2, k2) = sorted([(x[first], first), (x[second], second)])
    return {
        "center1": c1,
        "center2": c2,
        "width1": _fwhm(x, signal, k1),
        "width2": _fwhm(x, signal, k2),
        "amp1": signal[k1],
        "amp2": signal[k2],
        "offset": offset,
    }


def _guess_ramsey_fringe(x, y):
    x, y = _sorted(x, y)
    offset = float(y.mean())
    frequency = _dominant_frequency(x, y)
    t2 = max(float(x[-1] - x[0]) / 2.0, _spacing(x))
    envelope = np.exp(-((x / t2) ** 2))
    basis = np.column_stack([envelope * np.sin(TWO_PI * frequency * x), envelope * np.cos(TWO_PI * frequency * x)])
    (s, c), *_ = np.linalg.lstsq(basis, y - offset, rcond=None)
    return {
        "amplitude": math.hypot(s, c) or 1e-3,
        "t2_star": t2,
        "frequency": frequency,
        "phase": math.atan2(c, s),
        "offset": offset,
    }


def _guess_decay(x, y):
    x, y = _sorted(x, y)
    tail = max(1, x.size // 10)
    v_inf = float(y[-tail:].mean())
    v0 = float(y[0] - v_inf)
    if v0 == 0:
        v0 = float(np.ptp(y)) or 1.0
    level = v_inf + v0 / math.e
    t = _decay_time(x, y if v0 > 0 else -y, level if v0 > 0 else -level)
    return v0, max(t, _spacing(x)), v_inf


def _guess_stretched_exp(x, y):
    v0, t2, v_inf = _guess_decay(x, y)
    return {"v0": v0, "t2": t2, "n": 2.0, "v_inf": v_inf}


def _guess_exp_decay(x, y):
    a, tau, c = _guess_decay(x, y)
    return {"amplitude": a, "tau": tau, "offset": c}


def _guess_cosine(x, y):
    basis = np.column_stack([np.cos(x), np.ones_like(x)])
    (a, b), *_ = np.linalg.lstsq(basis, y, rcond=None)
    return {"amplitude": a, "offset": b}


def _guess_linear(x, y):
    slope, intercept = np.polyfit(x, y, 1)
    return {"slope": slope, "intercept": intercept}


def _guess_t1(x, y):
    x, y = _sorted(x, y)
    level = 0.5 * (1.0 - 1.0 / math.e)
    if np.max(y) >= level:
        above = int(np.nonzero(y >= level)[0][0])
        return {"t1": max(float(x[above]), _spacing(x))}
    last = min(float(y[-1]), 0.499)
    if last <= 0:
        return {"t1": float(x[-1]) * 10.0 or 1.0}
    return {"t1": -float(x[-1]) / math.log(1.0 - 2.0 * last)}


# -- factories ---------------------------------------------------------------


def lorentzian_pair():
    return FitModel(
        name="lorentzian-pair",
        parameters=(
            Parameter("center1", 0.0),
            Parameter("center2", 1.0),
            Parameter("width1", 1.0, POSITIVE),
            Parameter("width2", 1.0, POSITIVE),
            Parameter("amp1", 1.0),
            Parameter("amp2", 1.0),
            Parameter("offset", 0.0),
        ),
        function=lambda p, x: lorentzian_pair_values(x, *p),
        guess=_guess_lorentzian_pair,
    )


def ramsey_fringe():
    return FitModel(
        name="ramsey-fringe",
        parameters=(
            Parameter("amplitude", 0.5),
            Parameter("t2_star", 1.3, POSITIVE),
            Parameter("frequency", 5.0),
            Parameter("phase", 0.0),
            Parameter("offset", 0.5),
        ),
        function=lambda p, x: ramsey_fringe_values(x, *p),
        guess=_guess_ramsey_fringe,
    )


def stretched_exp():
    return FitModel(
        name="stretched-exp",
        parameters=(
            Parameter("v0", 0.25),
            Parameter("t2", 28.0, POSITIVE),
            Parameter("n", 2.0, EXPONENT_BOUNDS),
            Parameter("v_inf", 0.0),
        ),
        function=lambda p, x: stretched_exp_values(x, *p),
        guess=_guess_stretched_exp,
    )


def cosine():
    return FitModel(
        name="cosine",
        parameters=(Parameter("amplitude", 0.5), Parameter("offset", 0.5)),
        function=lambda p, x: p[0] * np.cos(x) + p[1],
        guess=_guess_cosine,
    )


def exp_decay():
    return FitModel(
        name="exp-decay",
        parameters=(
            Parameter("amplitude", 1.0),
            Parameter("tau", 1.0, POSITIVE),
            Parameter("offset", 0.0),
        ),
        function=lambda p, x: p[0] * np.exp(-x / p[1]) + p[2],
        guess=_guess_exp_decay,
    )


def init_rate(gamma_mhz=35.0):
    """Saturation model for the initialization rate; Gamma/2pi (MHz) is fixed."""
    gamma = gamma_mhz * MHZ / PER_US

    def guess(x, y):
        p_sat = float(np.median(x))
        x_max = float(np.max(x))
        eta = 0.5 * gamma * (x_max / (x_max + p_sat)) / float(np.max(y))
        return {"p_sat": p_sat, "eta": max(eta, 1.5)}

    return FitModel(
        name="init-rate",
        parameters=(Parameter("p_sat", 4.6, POSITIVE), Parameter("eta", 80.0, (1.0, None))),
        function=lambda p, x: saturation_rate_values(x, p[0], p[1], gamma),
        guess=guess,
    )


def t1_recovery():
    return FitModel(
        name="t1-recovery",
        parameters=(Parameter("t1", 15.0, POSITIVE),),
        function=lambda p, x: 0.5 * (1.0 - np.exp(-x / p[0])),
        guess=_guess_t1,
    )


def ramsey_2d(t2_star_us=1.3, t_pi_half_us=0.07, serrodyne_mhz=5.0):
    """Closed-form Ramsey map with the envelope and pulse timing held fixed."""

    def guess(x, y):
        x = np.asarray(x, dtype=float)
        deltas = np.unique(x[:, 1])
        row = deltas[int(np.argmin(np.abs(deltas)))]
        mask = x[:, 1] == row
        fringe = _dominant_frequency(x[mask, 0], y[mask])
        return {
            "ac_stark": fringe - serrodyne_mhz - row,
            "contrast": float(np.ptp(y)) / 2.0 or 0.25,
            "width": float(np.max(np.abs(deltas))) or 1.0,
            "offset": float(np.mean(y)),
        }

    return FitModel(
        name="ramsey-2d",
        parameters=(
            Parameter("ac_stark", 0.0),
            Parameter("contrast", 0.5),
            Parameter("width", 5.0, POSITIVE),
            Parameter("offset", 0.5),
        ),
        function=lambda p, x: ramsey_2d_values(x, *p, t2_star_us, t_pi_half_us, serrodyne_mhz),
        guess=guess,
        n_inputs=2,
    )


def linear():
    return FitModel(
        name="linear",
        parameters=(Parameter("slope", 1.0), Parameter("intercept", 0.0)),
        function=lambda p, x: p[0] * np.asarray(x) + p[1],
        guess=_guess_linear,
    )


MODELS = {
    "lorentzian-pair": lorentzian_pair,
    "ramsey-fringe": ramsey_fringe,
    "stretched-exp": stretched_exp,
    "cosine": cosine,
    "exp-decay": exp_decay,
    "init-rate": init_rate,
    "t1-recovery": t1_recovery,
    "ramsey-2d": ramsey_2d,
    "linear": linear,
}


def build_model(name, **fixed):
    """Instantiate a registered model; ``fixed`` goes to its factory."""
    try:
        factory = MODELS[name]
    except KeyError:
        raise ValueError(f"unknown model {name!r}; available: {', '.join(MODELS)}") from None
    return factory(**fixed)


def fit(model, x, y, sigma=None, initial=None, allow_singular=False):
    """Guess from the data, apply explicit ``initial`` overrides, then fit."""
    model = model.guessed(x, y)
    if initial:
        model = model.with_initial(initial)
    return least_squares(model, x, y, sigma, allow_singular=allow_singular)


# -- experiment helpers -------------------------------------------------------


def fit_lorentzian_pair(x, y, sigma=None):
    """Two-peak fit with the splitting and mean linewidth as derived values.

    Overlapping peaks do not raise; the result is flagged ``degenerate``.
    """
    result = fit(lorentzian_pair(), x, y, sigma, allow_singular=True)
    p, cov = result.params, result.covariance
    names = result.param_names
    i1, i2 = names.index("center1"), names.index("center2")
    w1, w2 = names.index("width1"), names.index("width2")
    with np.errstate(invalid="ignore"):
        split_var = cov[i1, i1] + cov[i2, i2] - 2.0 * cov[i1, i2]
        width_var = 0.25 * (cov[w1, w1] + cov[w2, w2] + 2.0 * cov[w1, w2])
    result.derived["splitting"] = (
        abs(p["center2"] - p["center1"]),
        math.sqrt(split_var) if np.isfinite(split_var) and split_var >= 0 else math.inf,
    )
    result.derived["linewidth"] = (
        0.5 * (p["width1"] + p["width2"]),
        math.sqrt(width_var) if np.isfinite(width_var) and width_var >= 0 else math.inf,
    )
    return result


def extract_visibility(phis, y, sigma=None):
    """Fit a cos(phi) + b and return the visibility |a|/b with its propagated error.

    The sign of a only says which pole the sequence refocuses to (a Hahn
    pi pulse about x lands on the opposite pole from CPMG).
    """
    result = fit(cosine(), np.asarray(phis, dtype=float), y, sigma)
    a, b = result["amplitude"], result["offset"]
    cov = result.covariance
    if b == 0:
        return Visibility(0.0, math.inf, a, b)
    value = abs(a) / b
    variance = cov[0, 0] / b**2 + cov[1, 1] * a**2 / b**4 - 2.0 * cov[0, 1] * a / b**3
    return Visibility(value, math.sqrt(max(variance, 0.0)), a, b)


def fit_exp_decay(t, y, sigma=None):
    return fit(exp_decay(), np.asarray(t, dtype=float), y, sigma)


def fit_decay(taus, values, sigma=None):
    """Stretched exponential v0 exp(-(tau/T2)^n) + v_inf."""
    return fit(stretched_exp(), np.asarray(taus, dtype=float), values, sigma)


def fit_t1(delays, populations, sigma=None):
    return fit(t1_recovery(), np.asarray(delays, dtype=float), populations, sigma)


def fit_init_rates(powers, rates, sigma, dev):
    """(p_sat, eta) from initialization rates in 1/us at powers in nW."""
    return fit(init_rate(dev.gamma), np.asarray(powers, dtype=float), rates, sigma)


def fit_ramsey_rows(scan):
    """One ramsey-fringe fit per delta row of a (delta, tau) ScanResult.

    Each result carries ``detuning_shift`` = frequency - delta as a derived value.
    """
    deltas, taus = scan.axes
    results = []
    for k, delta in enumerate(deltas):
        sigma = scan.stderr[k] if np.all(scan.stderr[k] > 0) else None
        result = fit(ramsey_fringe(), taus, scan.values[k], sigma)
        result.derived["detuning_shift"] = (result["frequency"] - delta, result.error("frequency"))
        results.append(result)
    return results


def fit_ramsey_map(scan, t2_star_us, t_pi_half_us, serrodyne_mhz):
    """Closed-form fit of a whole (delta, tau) map for the AC Stark shift."""
    deltas, taus = scan.axes
    dd, tt = np.meshgrid(deltas, taus, indexing="ij")
    x = np.column_stack([tt.ravel(), dd.ravel()])
    model = ramsey_2d(t2_star_us, t_pi_half_us, serrodyne_mhz)
    return fit(model, x, scan.values.ravel())


def fit_rabi_master(times_us, populations, dev, noise=None, sigma=None, initial=None, seed=0, shots=64,
                    detuning_mhz=0.0, init_fidelity=1.0, threads=1):
    """Fit (omega MHz, gamma1 1/us, gamma2 1/us) by simulating the Rabi experiment.

    Without an explicit noise model the detuning is quasi-static with
    sigma = sqrt(2)/T2*. Every evaluation reuses ``seed`` so the cost surface
    is smooth in the parameters.
    """
    if noise is None:
        noise = NoiseModel(quasi_static_sigma=math.sqrt(2.0) / dev.t2_star_s)
    times = np.asarray(times_us, dtype=float)
    populations = np.asarray(populations, dtype=float)

    def simulate(p, x):
        mean, _ = rabi_populations(
            x * US,
            p[0] * MHZ,
            p[1] * PER_US,
            p[2] * PER_US,
            noise=noise,
            seed=seed,
            shots=shots,
            detuning=detuning_mhz * MHZ,
            init_fidelity=init_fidelity,
            threads=threads,
        )
        return mean

    guess = {
        "omega": max(_dominant_frequency(times, populations), 1.0 / max(float(np.ptp(times)), 1e-3)),
        "gamma1": 0.3,
        "gamma2": 3.0,
    }
    guess.update(initial or {})
    model = FitModel(
        name="rabi-master",
        parameters=(
            Parameter("omega", guess["omega"], POSITIVE),
            Parameter("gamma1", guess["gamma1"], POSITIVE),
            Parameter("gamma2", guess["gamma2"], POSITIVE),
        ),
        function=simulate,
    )
    logger.debug("rabi-master start: %s", guess)
    return least_squares(model, times, populations, sigma)
