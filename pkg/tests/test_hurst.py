import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from mbm_extremes.errors import ConfigError, DomainError
from mbm_extremes.hurst import (Constant, LogReciprocal, PeakPerturbation, PowerLaw, Tabulated,
                                holder_certificate, hurst_from_dict)

E = math.e


def variants():
    return [
        Constant(h=0.5, t1=0.0, t2=4.0),
        PowerLaw(c=0.1, gamma=1.0, t1=0.5, t2=5.0),
        PowerLaw(c=0.3, gamma=1.0, t1=1.0, t2=2.0),
        LogReciprocal(t1=3.0, t2=12.0),
        PeakPerturbation(t_star=E, h_star=0.25, c=0.1, gamma=0.5, t1=1.0, t2=2 * E),
        PeakPerturbation(t_star=2.0, h_star=0.6, c=0.05, gamma=1.5, t1=1.0, t2=3.0),
        Tabulated(knots_t=(1.0, 1.5, 2.0, 3.0), knots_h=(0.3, 0.4, 0.45, 0.7)),
    ]


def test_examples():
    assert Constant(h=0.5, t1=0, t2=3).value(2.0) == 0.5
    assert LogReciprocal(t1=3, t2=10).value(E ** 2) == pytest.approx(0.5, rel=1e-15)
    assert PowerLaw(c=0.1, gamma=1.0, t1=1, t2=5).value(3.0) == pytest.approx(0.3, rel=1e-15)
    assert PowerLaw(c=0.1, gamma=2.0, t1=0.8, t2=2.0).derivative(1.0) == pytest.approx(0.2, rel=1e-15)
    assert Constant(h=0.3, t1=0, t2=1).derivative(0.5) == 0.0
    lr = LogReciprocal(t1=3.0, t2=10)
    assert lr.derivative(3.0) == pytest.approx(-1 / (3.0 * math.log(3.0) ** 2), rel=1e-14)


def test_log_reciprocal_derivative_near_e():
    # H -> 1 as t -> e, so the domain needs a relaxed upper bound to start next to e
    lr = LogReciprocal(t1=E + 1e-9, t2=10, h_hi=1 - 1e-12)
    assert lr.derivative(E + 1e-9) == pytest.approx(-1 / E, rel=1e-8)
    t, h = E + 1e-3, 1e-6
    fd = (lr.value(t + h) - lr.value(t - h)) / (2 * h)
    assert fd == pytest.approx(lr.derivative(t), rel=1e-7)


@pytest.mark.parametrize("hf", variants(), ids=lambda h: h.kind)
def test_values_in_unit_interval_on_fine_grid(hf):
    t = np.linspace(hf.t1, hf.t2, 10_000)
    h = hf.value(t)
    assert np.all((h > 0) & (h < 1))


@pytest.mark.parametrize("hf", variants(), ids=lambda h: h.kind)
def test_derivative_matches_central_differences(hf):
    rng = np.random.default_rng(3)
    lo, hi = hf.t1, hf.t2
    t = rng.uniform(lo + 0.01 * (hi - lo), hi - 0.01 * (hi - lo), 100)
    if isinstance(hf, PeakPerturbation):
        t = t[np.abs(t - hf.t_star) > 1e-2]
    step = 1e-6
    fd = (hf.value(t + step) - hf.value(t - step)) / (2 * step)
    assert np.max(np.abs(fd - hf.derivative(t))) < 1e-6


@given(st.floats(-1.0, 1.0).filter(lambda x: x != 0))
def test_peak_is_exact(h):
    hf = PeakPerturbation(t_star=E, h_star=0.25, c=0.1, gamma=0.5, t1=1.0, t2=2 * E)
    t = E + h * (E - 1.0)
    offset = t - E  # exact, so the check is not polluted by rounding of E + h
    assert hf.value(t) - 0.25 == pytest.approx(-0.1 * abs(offset) ** 0.5, abs=1e-15)


def test_peak_not_differentiable_at_t_star():
    hf = PeakPerturbation(t_star=E, h_star=0.25, c=0.1, gamma=0.5, t1=1.0, t2=2 * E)
    assert not hf.is_differentiable()
    with pytest.raises(DomainError):
        hf.derivative(E)


@pytest.mark.parametrize("kwargs", [
    dict(cls=Constant, h=0.99, t1=0, t2=1),
    dict(cls=PowerLaw, c=0.5, gamma=1.0, t1=1, t2=3),
    dict(cls=PeakPerturbation, t_star=E, h_star=0.25, c=1.0, gamma=0.5, t1=0, t2=2 * E),
    dict(cls=LogReciprocal, t1=2.0, t2=5.0),
    dict(cls=Constant, h=0.5, t1=2, t2=1),
])
def test_invalid_specs_rejected(kwargs):
    cls = kwargs.pop("cls")
    with pytest.raises(DomainError):
        cls(**kwargs)


def test_tabulated_requires_increasing_knots():
    with pytest.raises(DomainError):
        Tabulated(knots_t=(1.0, 1.0, 2.0), knots_h=(0.3, 0.4, 0.5))


def test_tabulated_monotone_interpolation():
    hf = Tabulated(knots_t=(1.0, 1.5, 2.0, 3.0), knots_h=(0.3, 0.4, 0.45, 0.7))
    t = np.linspace(1, 3, 1001)
    assert np.all(np.diff(hf.value(t)) >= 0)
    assert hf.value(1.5) == pytest.approx(0.4)


def test_outside_domain_is_domain_error():
    with pytest.raises(DomainError):
        Constant(h=0.5, t1=0, t2=1).value(1.5)


@pytest.mark.parametrize("hf", variants(), ids=lambda h: h.kind)
def test_params_round_trip(hf):
    again = hurst_from_dict(hf.params())
    t = np.linspace(hf.t1, hf.t2, 17)
    assert np.array_equal(again.value(t), hf.value(t))
    assert again.params() == hf.params()


def test_from_dict_rejects_unknowns():
    with pytest.raises(ConfigError):
        hurst_from_dict({"variant": "wavelet", "t1": 0, "t2": 1})
    with pytest.raises(ConfigError):
        hurst_from_dict({"variant": "constant", "h": 0.5, "hh": 1, "t1": 0, "t2": 1})


def test_holder_certificate_examples():
    cert = holder_certificate(Constant(h=0.5, t1=0, t2=2), 1.0)
    assert cert.ok and cert.c_hat == 0.0
    peak = PeakPerturbation(t_star=E, h_star=0.25, c=0.1, gamma=0.5, t1=1.0, t2=2 * E)
    cert = holder_certificate(peak, 0.5)
    assert cert.ok
    assert cert.c_hat == pytest.approx(0.1, rel=0.05)
    bad = holder_certificate(peak, 1.0)
    assert not bad.ok
    assert bad.growth > 1.3
    finer = holder_certificate(peak, 1.0, grid_n=2049)
    assert finer.c_hat > 1.5 * bad.c_hat
