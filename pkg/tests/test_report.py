"""Tests for fit reports."""

import numpy as np

from snv_qubit.fitting import FitModel, Parameter, least_squares
from snv_qubit.models import build_model
from snv_qubit.report import generate_report, write_report


def _line_fit():
    x = np.linspace(0.0, 1.0, 11)
    y = 2.0 * x + 1.0 + 0.01 * np.cos(7.0 * x)
    return least_squares(build_model("linear"), x, y)


def _degenerate_fit():
    model = FitModel(
        name="product",
        parameters=(Parameter("a", 1.0), Parameter("b", 2.0)),
        function=lambda p, x: p[0] * p[1] * x,
    )
    x = np.linspace(0.0, 1.0, 10)
    return least_squares(model, x, 6.0 * x, allow_singular=True)


def _stalled_fit():
    model = FitModel(
        name="step",
        parameters=(Parameter("a", 0.0),),
        function=lambda p, x: np.where(p[0] > 0.0, 10.0, p[0] + 1.0) * np.ones_like(x),
    )
    return least_squares(model, np.arange(4.0), np.full(4, 2.0))


class TestTextReport:
    def test_header_and_values(self):
        text = generate_report(_line_fit())
        lines = text.splitlines()
        assert lines[0] == "Fit: linear"
        assert "converged after" in lines[1]
        assert any(line.strip().startswith("slope") and "+-" in line for line in lines)
        assert "WARNING" not in text

    def test_custom_title(self):
        assert generate_report(_line_fit(), title="calibration").startswith("Fit: calibration\n")

    def test_derived_values_listed(self):
        result = _line_fit()
        result.derived["ratio"] = (2.0, 0.1)
        assert "ratio" in generate_report(result).splitlines()[-1]

    def test_degenerate_warning(self):
        text = generate_report(_degenerate_fit())
        assert "WARNING: degenerate fit" in text
        assert "+- inf" in text

    def test_stalled_fit_status(self):
        assert "NOT converged (damping limit)" in generate_report(_stalled_fit())


class TestKvReport:
    def test_keys(self):
        kv = dict(
            line.split("=", 1) for line in generate_report(_line_fit(), fmt="kv").splitlines()
        )
        assert kv["model"] == "linear"
        assert kv["converged"] == "true"
        assert kv["degenerate"] == "false"
        assert abs(float(kv["slope"]) - 2.0) < 0.1
        assert float(kv["intercept_err"]) > 0

    def test_degenerate_flag(self):
        kv = generate_report(_degenerate_fit(), fmt="kv")
        assert "degenerate=true" in kv
        assert "a_err=inf" in kv


class TestWriteReport:
    def test_writes_both_formats(self, tmp_path):
        names = write_report(_line_fit(), tmp_path, "rabi")
        assert names == ["rabi.fit.txt", "rabi.fit.kv"]
        assert (tmp_path / "rabi.fit.kv").read_text().startswith("model=linear\n")
