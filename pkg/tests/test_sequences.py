"""Tests for pulse sequences and the batched qubit simulator."""

import math

import numpy as np
import pytest

from snv_qubit.constants import MHZ, PER_US
from snv_qubit.noise import noise_model, point_rng
from snv_qubit.params import DeviceParams, NoiseModel, RamanDriveParams, ReadoutModel
from snv_qubit.raman import effective_rabi_rate, scattering_rate
from snv_qubit.sequences import (
    Delay,
    Initialize,
    PulseRates,
    PulseSequence,
    QubitSimulator,
    Raman,
    Readout,
    Reset,
    Stabilize,
    apply_readout,
    evolve_shots,
    map_points,
    prepared_state,
    pulse_rates,
    qubit_liouvillian,
    rabi_populations,
    shot_statistics,
)

DEV = DeviceParams()
# 500 MHz Rabi rate: pulses of a few ns, effectively instantaneous.
FAST = PulseRates(500.0 * MHZ, 0.0, 0.0)
HALF_PI_US = 1.0 / (4.0 * 500.0)


def _half_pi(phase=0.0):
    return Raman(RamanDriveParams(duration=HALF_PI_US, phase=phase))


def _ramsey(tau_us):
    return PulseSequence((Initialize(), _half_pi(), Delay(tau_us), _half_pi(), Readout()))


class TestPulseSequence:
    def test_needs_single_trailing_readout(self):
        with pytest.raises(ValueError, match="exactly one Readout"):
            PulseSequence((Initialize(), Delay(1.0)))
        with pytest.raises(ValueError, match="exactly one Readout"):
            PulseSequence((Readout(), Readout()))
        with pytest.raises(ValueError, match="last segment"):
            PulseSequence((Readout(), Delay(1.0)))

    def test_negative_duration_rejected(self):
        with pytest.raises(ValueError, match="duration"):
            Delay(-1.0)

    def test_duration_and_coherent_segments(self):
        seq = PulseSequence(
            (Stabilize(10.0), Initialize(2.0), _half_pi(), Delay(3.0), Readout(5.0))
        )
        assert seq.duration == pytest.approx(20.0 + HALF_PI_US)
        np.testing.assert_allclose(
            seq.coherent_durations(), [0.0, 0.0, HALF_PI_US * 1e-6, 3e-6, 0.0]
        )

    def test_last_raman(self):
        assert _ramsey(1.0).last_raman() == 3
        with pytest.raises(ValueError, match="no Raman"):
            PulseSequence((Initialize(), Readout())).last_raman()


class TestRates:
    def test_pulse_rates_from_drive(self):
        drive = RamanDriveParams(delta=1200.0, power=650.0)
        noise = NoiseModel(gamma1=10.0)
        rates = pulse_rates(drive, DEV, noise)
        gamma_os = scattering_rate(drive, DEV).gamma_os
        assert rates.omega == pytest.approx(effective_rabi_rate(drive, DEV))
        assert rates.gamma2 == pytest.approx(gamma_os)
        assert rates.gamma1 == pytest.approx(10.0 + gamma_os / DEV.eta)

    def test_zero_duration_is_identity(self):
        states = prepared_state(0.3, 4)
        sup = qubit_liouvillian(1.0, np.zeros(4), 0.0, 1.0, 1.0)
        assert evolve_shots(states, sup, 0.0) is states


class TestQubitSimulator:
    def test_unprepared_spin_is_mixed(self):
        sim = QubitSimulator(DEV, rates=FAST)
        pops = sim.run(PulseSequence((Readout(),)), point_rng(0, 0), 3)
        np.testing.assert_allclose(pops, 0.5)

    def test_reset_and_initialize(self):
        sim = QubitSimulator(DEV, readout=ReadoutModel(init_fidelity=0.9), rates=FAST)
        assert sim.run(PulseSequence((Reset(), Readout())), point_rng(0, 0), 1)[0] == 1.0
        init = sim.run(PulseSequence((Initialize(), Readout())), point_rng(0, 0), 1)[0]
        assert init == pytest.approx(0.1)

    def test_pi_pulse_flips(self):
        sim = QubitSimulator(DEV, rates=FAST)
        seq = PulseSequence((Initialize(), _half_pi(), _half_pi(), Readout()))
        assert sim.run(seq, point_rng(0, 0), 1)[0] == pytest.approx(1.0, abs=1e-10)

    @pytest.mark.parametrize("tau_us, expected", [(0.25, 0.5), (0.5, 0.0), (1.0, 1.0)])
    def test_ramsey_fringe(self, tau_us, expected):
        sim = QubitSimulator(DEV, frame_detuning=1.0 * MHZ, rates=FAST)
        pop = sim.run(_ramsey(tau_us), point_rng(0, 0), 1)[0]
        assert pop == pytest.approx(expected, abs=1e-2)

    def test_ac_stark_only_acts_during_delays(self):
        sim = QubitSimulator(DEV, frame_detuning=-1.0 * MHZ, ac_stark=1.0 * MHZ, rates=FAST)
        for tau_us in (0.25, 0.5, 1.0):
            assert sim.run(_ramsey(tau_us), point_rng(0, 0), 1)[0] == pytest.approx(1.0, abs=1e-2)

    def test_relaxation_during_delay(self):
        sim = QubitSimulator(DEV, noise=NoiseModel(gamma1=1e3), rates=FAST)
        seq = PulseSequence((Initialize(), Delay(1000.0), Readout()))
        pop = sim.run(seq, point_rng(0, 0), 1)[0]
        assert pop == pytest.approx(0.5 * (1.0 - math.exp(-1.0)), rel=1e-8)

    def test_leak_dephasing_during_delay(self):
        sim = QubitSimulator(DEV, noise=NoiseModel(leak_dephasing=1e4), rates=FAST)
        pop = sim.run(_ramsey(100.0), point_rng(0, 0), 1)[0]
        assert pop == pytest.approx(0.5 * (1.0 + math.exp(-1.0)), abs=1e-4)

    def test_final_phases_sweep(self):
        sim = QubitSimulator(DEV, rates=FAST)
        seq = PulseSequence((Initialize(), _half_pi(), _half_pi(), Readout()))
        phis = np.linspace(0.0, 2.0 * math.pi, 9)
        pops = sim.run(seq, point_rng(0, 0), 1, final_phases=phis)
        assert pops.shape == (9, 1)
        np.testing.assert_allclose(pops[:, 0], 0.5 + 0.5 * np.cos(phis), atol=1e-8)

    def test_final_phases_share_noise_realization(self):
        sim = QubitSimulator(DEV, noise=noise_model(DEV), rates=PulseRates(5.0 * MHZ, 0.0, 0.0))
        half = 1.0 / (4.0 * 5.0)
        seq = PulseSequence(
            (Initialize(), Raman(RamanDriveParams(duration=half)), Delay(2.0),
             Raman(RamanDriveParams(duration=half)), Readout())
        )
        swept = sim.run(seq, point_rng(4, 2), 32, final_phases=[1.2])[0]
        explicit = PulseSequence(
            seq.segments[:3] + (Raman(RamanDriveParams(duration=half, phase=1.2)), Readout())
        )
        np.testing.assert_allclose(swept, sim.run(explicit, point_rng(4, 2), 32), atol=1e-12)

    def test_shots_must_be_positive(self):
        with pytest.raises(ValueError, match="shots"):
            QubitSimulator(DEV).run(_ramsey(1.0), point_rng(0, 0), 0)


class TestStatistics:
    def test_single_shot_has_no_error(self):
        mean, err = shot_statistics(np.array([[0.2], [0.4]]))
        np.testing.assert_allclose(mean, [0.2, 0.4])
        np.testing.assert_array_equal(err, [0.0, 0.0])

    def test_standard_error(self):
        mean, err = shot_statistics(np.array([0.0, 1.0, 0.0, 1.0]))
        assert mean == pytest.approx(0.5)
        assert err == pytest.approx(np.std([0, 1, 0, 1], ddof=1) / 2.0)

    def test_readout_without_shot_noise_passes_through(self):
        mean = np.array([0.1, 0.9])
        out, err = apply_readout(mean, np.zeros(2), ReadoutModel(), point_rng(0, 0))
        assert out is mean

    def test_shot_noise_is_unbiased(self):
        mean = np.full(2000, 0.4)
        out, err = apply_readout(mean, np.zeros(2000), ReadoutModel(shot_noise=True), point_rng(0, 1))
        assert out.mean() == pytest.approx(0.4, abs=2e-3)
        assert np.all(err > 0)
        assert 0.5 * err[0] < out.std() < 2.0 * err[0]


class TestRabiPopulations:
    def test_noiseless_flop(self):
        times = np.linspace(0.0, 1e-6, 11)
        omega = 2.0 * MHZ
        mean, err = rabi_populations(times, omega, 0.0, 0.0)
        np.testing.assert_allclose(mean, np.sin(omega * times / 2.0) ** 2, atol=1e-10)
        assert not err.any()

    def test_depolarization_floor(self):
        times = np.array([0.0, 2e-6])
        gamma1 = 1.0 * PER_US
        mean, _ = rabi_populations(times, 0.0, gamma1, 0.0)
        expected = 0.5 * (1.0 - math.exp(-2.0)) + 0.25 * (1.0 - math.exp(-2.0 / (2.0 * math.pi)))
        assert mean[1] == pytest.approx(expected, rel=1e-8)

    def test_threads_do_not_change_results(self):
        times = np.linspace(0.0, 2e-6, 9)
        noise = NoiseModel(quasi_static_sigma=1.0 * PER_US)
        serial = rabi_populations(times, 3.6 * MHZ, 0.0, 1.0 * PER_US, noise, seed=5, shots=16)
        pooled = rabi_populations(
            times, 3.6 * MHZ, 0.0, 1.0 * PER_US, noise, seed=5, shots=16, threads=4
        )
        np.testing.assert_array_equal(serial[0], pooled[0])
        np.testing.assert_array_equal(serial[1], pooled[1])


class TestMapPoints:
    def test_order_preserved(self):
        assert map_points(lambda i: i * i, 6, threads=3) == [0, 1, 4, 9, 16, 25]
        assert map_points(lambda i: i, 0) == []
