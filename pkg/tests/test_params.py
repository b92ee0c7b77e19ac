"""Tests for parameter value types and their validation."""

import math
from dataclasses import FrozenInstanceError

import numpy as np
import pytest

from snv_qubit.constants import MHZ, US
from snv_qubit.params import (
    DeviceParams,
    JahnTellerStrain,
    NoiseModel,
    NuclearSpinModel,
    RamanDriveParams,
    ReadoutModel,
)


class TestDeviceParams:
    def test_defaults_in_lab_units(self):
        dev = DeviceParams()
        assert dev.gamma_rad == pytest.approx(35.0 * MHZ)
        assert dev.t2_star_s == pytest.approx(1.3 * US)
        assert dev.hyperfine_rad == pytest.approx(42.6 * MHZ)

    def test_field_vector(self):
        dev = DeviceParams(b_field=0.5, b_polar=90.0, b_azimuth=90.0)
        np.testing.assert_allclose(dev.b_vector, (0.0, 0.5, 0.0), atol=1e-15)
        assert dev.b_perp == pytest.approx(0.5)

    def test_axial_field_has_no_perpendicular_part(self):
        dev = DeviceParams(b_polar=0.0)
        assert dev.b_perp == 0.0
        assert dev.b_vector[2] == pytest.approx(dev.b_field)

    def test_frozen(self):
        with pytest.raises(FrozenInstanceError):
            DeviceParams().eta = 10.0

    def test_replace_validates(self):
        with pytest.raises(ValueError, match="eta"):
            DeviceParams().replace(eta=0.5)

    @pytest.mark.parametrize(
        "changes, message",
        [
            ({"gamma": 0.0}, "gamma"),
            ({"p_sat": -1.0}, "p_sat"),
            ({"b_field": -0.1}, "b_field"),
            ({"b_polar": 200.0}, "b_polar"),
            ({"t2_star": math.nan}, "t2_star"),
        ],
    )
    def test_rejects_bad_values(self, changes, message):
        with pytest.raises(ValueError, match=message):
            DeviceParams(**changes)


class TestStrain:
    def test_matrix(self):
        np.testing.assert_array_equal(JahnTellerStrain(1.0, 2.0, 3.0).matrix(), [[1, 3], [3, 2]])


class TestRamanDriveParams:
    def test_unit_conversions(self):
        drive = RamanDriveParams(delta=300.0, two_photon_delta=-1.0, duration=0.5)
        assert drive.delta_rad == pytest.approx(300.0 * MHZ)
        assert drive.two_photon_rad == pytest.approx(-1.0 * MHZ)
        assert drive.duration_s == pytest.approx(0.5 * US)

    def test_negative_detuning_allowed(self):
        assert RamanDriveParams(delta=-300.0).delta == -300.0

    @pytest.mark.parametrize("field", ["power", "duration", "rabi"])
    def test_rejects_negative(self, field):
        with pytest.raises(ValueError, match=field):
            RamanDriveParams(**{field: -1.0})


class TestNoiseModel:
    def test_default_is_noiseless(self):
        assert NoiseModel().is_noiseless
        assert not NoiseModel(gamma1=1.0).is_noiseless

    def test_bath_needs_correlation_time(self):
        with pytest.raises(ValueError, match="bath_tau_c"):
            NoiseModel(bath_sigma=1.0)

    def test_rejects_unknown_bath_shape(self):
        with pytest.raises(ValueError, match="unknown bath shape .lorentzian."):
            NoiseModel(bath_sigma=1.0, bath_tau_c=1.0, bath_shape="lorentzian")

    def test_rejects_negative_rates(self):
        with pytest.raises(ValueError, match="leak_dephasing"):
            NoiseModel(leak_dephasing=-1.0)


class TestNuclearSpinModel:
    def test_centered_manifolds(self):
        shifts = NuclearSpinModel().manifolds()
        assert [s for s, _ in shifts] == pytest.approx([-21.3 * MHZ, 21.3 * MHZ])
        assert sum(w for _, w in shifts) == pytest.approx(1.0)

    def test_uncentered_manifolds(self):
        shifts = NuclearSpinModel(hyperfine_a=10.0).manifolds(centered=False)
        assert [s for s, _ in shifts] == pytest.approx([0.0, 10.0 * MHZ])

    def test_empty_manifold_dropped(self):
        assert len(NuclearSpinModel(populations=(1.0, 0.0)).manifolds()) == 1

    def test_populations_must_sum_to_one(self):
        with pytest.raises(ValueError, match="sum to 1"):
            NuclearSpinModel(populations=(0.7, 0.7))


class TestReadoutModel:
    def test_init_fidelity_range(self):
        with pytest.raises(ValueError, match="init_fidelity"):
            ReadoutModel(init_fidelity=0.4)
        assert ReadoutModel(init_fidelity=0.5).init_fidelity == 0.5

    def test_counts_positive(self):
        with pytest.raises(ValueError, match="counts"):
            ReadoutModel(counts=0)
