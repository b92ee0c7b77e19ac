"""Tests for the fit-model library and per-experiment fit helpers."""

import math

import numpy as np
import pytest

from snv_qubit.constants import PER_US
from snv_qubit.models import (
    build_model,
    extract_visibility,
    fit,
    fit_decay,
    fit_init_rates,
    fit_lorentzian_pair,
    fit_ramsey_map,
    fit_ramsey_rows,
    fit_t1,
    lorentzian_pair_values,
    ramsey_2d_values,
    saturation_rate_values,
    stretched_exp_values,
)
from snv_qubit.params import DeviceParams
from snv_qubit.protocols import ramsey_closed_form_scan
from snv_qubit.raman import init_rate

DEV = DeviceParams()


class TestModelFunctions:
    def test_lorentzian_peak_height_and_width(self):
        x = np.array([-0.5, 0.0, 0.5, 1000.0])
        y = lorentzian_pair_values(x, 0.0, 1000.0, 1.0, 2.0, 1.0, 0.5, 0.1)
        assert y[1] == pytest.approx(1.1, abs=1e-3)
        assert y[0] == pytest.approx(y[2])
        assert y[0] - 0.1 == pytest.approx(0.5, abs=1e-3)
        assert y[3] == pytest.approx(0.6, abs=1e-3)

    def test_stretched_exp_at_t2(self):
        assert stretched_exp_values(28.3, 0.26, 28.3, 3.7, 0.013) == pytest.approx(0.26 / math.e + 0.013)

    def test_saturation_rate_matches_raman_reduction(self):
        powers = np.array([0.5, 4.6, 50.0])
        gamma = DEV.gamma_rad / PER_US
        np.testing.assert_allclose(
            saturation_rate_values(powers, DEV.p_sat, DEV.eta, gamma), init_rate(powers, DEV) / PER_US
        )

    def test_ramsey_2d_on_resonance(self):
        x = np.array([[0.0, 0.0], [0.1, 0.0]])
        y = ramsey_2d_values(x, 0.0, 0.25, 5.0, 0.5, 1.3, 0.07, 5.0)
        assert y[0] == pytest.approx(0.75)
        assert y[1] == pytest.approx(0.5 + 0.25 * math.exp(-((0.1 / 1.3) ** 2)) * math.cos(math.pi))

    def test_ramsey_2d_loses_contrast_off_resonance(self):
        x = np.array([[0.0, 5.0]])
        # Lorentzian pulse factor of 1/2 at delta = width.
        y = ramsey_2d_values(x, 0.0, 0.25, 5.0, 0.5, 1.3, 0.0, 5.0)
        assert y[0] == pytest.approx(0.625)


class TestRegistry:
    def test_unknown_model(self):
        with pytest.raises(ValueError, match="unknown model 'gauss'"):
            build_model("gauss")

    def test_fixed_parameters_reach_factory(self):
        slow = build_model("init-rate", gamma_mhz=10.0)
        fast = build_model("init-rate", gamma_mhz=20.0)
        params = {"p_sat": 4.6, "eta": 80.0}
        ratio = fast.evaluate(params, np.array([1.0])) / slow.evaluate(params, np.array([1.0]))
        assert ratio[0] == pytest.approx(2.0)

    def test_explicit_initial_overrides_guess(self):
        x = np.linspace(0.0, 10.0, 50)
        y = 3.0 * np.exp(-x / 2.0) + 0.5
        result = fit(build_model("exp-decay"), x, y, initial={"tau": 1.0})
        assert result["tau"] == pytest.approx(2.0, rel=1e-6)
        with pytest.raises(ValueError, match="unknown parameter"):
            fit(build_model("exp-decay"), x, y, initial={"t": 1.0})


class TestLorentzianPair:
    def test_splitting_and_linewidth(self):
        x = np.linspace(-40.0, 40.0, 321)
        rng = np.random.default_rng(0)
        y = lorentzian_pair_values(x, -21.3, 21.3, 1.5, 1.7, 0.4, 0.38, 0.02) + rng.normal(0, 0.005, x.size)
        result = fit_lorentzian_pair(x, y)
        splitting, error = result.derived["splitting"]
        assert splitting == pytest.approx(42.6, abs=0.05)
        assert 0 < error < 0.1
        linewidth, _ = result.derived["linewidth"]
        assert linewidth == pytest.approx(1.6, abs=0.1)
        assert result["splitting"] == splitting


class TestVisibility:
    def test_perfect_cosine(self):
        phis = np.linspace(0.0, 2.0 * math.pi, 13, endpoint=False)
        v = extract_visibility(phis, 0.25 + 0.25 * np.cos(phis))
        assert v.visibility == pytest.approx(1.0, abs=1e-9)
        assert v.amplitude == pytest.approx(0.25)

    def test_inverted_cosine_has_positive_visibility(self):
        phis = np.linspace(0.0, 2.0 * math.pi, 13, endpoint=False)
        v = extract_visibility(phis, 0.5 - 0.2 * np.cos(phis))
        assert v.visibility == pytest.approx(0.4, abs=1e-9)
        assert v.amplitude < 0

    def test_flat_signal(self):
        phis = np.linspace(0.0, 2.0 * math.pi, 13, endpoint=False)
        rng = np.random.default_rng(1)
        v = extract_visibility(phis, 0.5 + rng.normal(0.0, 0.01, phis.size))
        assert v.visibility == pytest.approx(0.0, abs=0.03)
        assert math.isfinite(v.error) and v.error > 0


class TestDecayFits:
    def test_hahn_stack(self):
        taus = np.linspace(2.0, 60.0, 30)
        rng = np.random.default_rng(2)
        values = stretched_exp_values(taus, 0.26, 28.3, 3.7, 0.013) + rng.normal(0, 0.003, taus.size)
        result = fit_decay(taus, values, np.full(taus.size, 0.003))
        assert result["t2"] == pytest.approx(28.3, abs=3 * result.error("t2") + 0.1)
        assert result["n"] == pytest.approx(3.7, abs=3 * result.error("n") + 0.05)
        assert result["v0"] == pytest.approx(0.26, abs=0.01)

    def test_t1_recovery(self):
        delays = np.linspace(0.0, 60.0, 31)
        result = fit_t1(delays, 0.5 * (1.0 - np.exp(-delays / 15.0)))
        assert result["t1"] == pytest.approx(15.0, rel=1e-6)

    def test_init_rates(self):
        powers = np.geomspace(0.5, 50.0, 12)
        rates = init_rate(powers, DEV) / PER_US
        result = fit_init_rates(powers, rates, None, DEV)
        assert result["p_sat"] == pytest.approx(4.6, rel=1e-6)
        assert result["eta"] == pytest.approx(80.0, rel=1e-6)


class TestRamseyFits:
    def _scan(self):
        taus = np.arange(0.0, 3.0 + 1e-9, 0.025)
        return ramsey_closed_form_scan(taus, [-1.0, 0.0, 1.0], 5.0, 3.3, 1.3, 0.07)

    def test_rows_report_detuning_shift(self):
        results = fit_ramsey_rows(self._scan())
        for result in results:
            shift, _ = result.derived["detuning_shift"]
            assert shift == pytest.approx(8.3, abs=1e-6)
            assert result["t2_star"] == pytest.approx(1.3, rel=1e-6)

    def test_map_recovers_light_shift(self):
        result = fit_ramsey_map(self._scan(), 1.3, 0.07, 5.0)
        assert result["ac_stark"] == pytest.approx(3.3, abs=1e-6)
        assert result["width"] == pytest.approx(5.0, rel=1e-6)

