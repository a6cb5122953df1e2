import math
import warnings

import mpmath
import numpy as np
import pytest

from mbm_extremes.asymptotics import (ConstantsProvider, Scenario, asymptotic_curve, classify, evaluate,
                                      required_constant)
from mbm_extremes.constants_mc import ConstantEstimate, ConstantsProtocol
from mbm_extremes.errors import AsymptoticWarning, MissingConstantError, PreconditionError
from mbm_extremes.hurst import Constant, LogReciprocal, PeakPerturbation, PowerLaw
from mbm_extremes.special import normal_tail

from scenarios import direct_parameters, random_scenarios

E = math.e
mpmath.mp.dps = 30


def quiet(fn, *args, **kw):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", AsymptoticWarning)
        return fn(*args, **kw)


def everything(value=1.0):
    """Provider that answers any constant request with ``value`` (formula checks only)."""
    class Any(ConstantsProvider):
        def get(self, kind, alpha, a=None):
            return value
    return Any()


PICKANDS_PEAK = PeakPerturbation(t_star=E, h_star=0.2, c=0.1, gamma=0.5, t1=1.0, t2=E + 1.5)


@pytest.mark.parametrize("u", [10.0, 25.0])
def test_parameter_audit(u):
    for sc in random_scenarios(10, seed=7):
        res = classify(sc, u)
        ref = direct_parameters(sc, u)
        for key in ("mu", "a", "b", "alpha", "critical_point"):
            assert getattr(res, key) == pytest.approx(ref[key], rel=1e-12), (sc, key)
        assert res.Q == ref["Q"]
        assert res.regime == ref["regime"]
        sigma = float(sc.model.sigma(res.critical_point))
        assert res.mu * sigma == pytest.approx(u, rel=1e-12)


def test_thm2_ii_tie_gives_two_endpoints():
    # H(t) = t/2 on [1/4, 1/2]: sigma(1/4) = sigma(1/2) = 2**(-1/4)
    sc = Scenario(PowerLaw(c=0.5, gamma=1.0, t1=0.25, t2=0.5), "thm2_ii")
    res = classify(sc, 5.0)
    assert res.critical_point == sc.hurst.t2 and res.boundary == "two_endpoints"
    full = quiet(evaluate, sc, 8.0, everything(1.3))
    assert full.two_endpoint is not None
    assert set(full.two_endpoint["endpoints"]) == {"T1", "T2"}


def test_thm2_ii_decreasing_sigma_picks_t1():
    hf = PowerLaw(c=0.5, gamma=0.5, t1=0.02, t2=0.1)  # both left of exp(-2)
    res = classify(Scenario(hf, "thm2_ii"), 5.0)
    assert res.critical_point == 0.02
    m = Scenario(hf, "thm2_ii").model
    assert m.sigma(0.02) > m.sigma(0.1)


def test_thm1_endpoint_peak():
    hf = PeakPerturbation(t_star=E, h_star=0.2, c=0.1, gamma=0.5, t1=1.0, t2=E)
    res = classify(Scenario(hf, "thm1"), 10.0)
    assert res.boundary == "endpoint" and res.Q == 1


def test_thm1_pickands_value_independent():
    sc = Scenario(PICKANDS_PEAK, "thm1")
    h_alpha = 1.37
    res = evaluate(sc, 10.0, _pickands_provider(0.4, h_alpha))
    assert res.regime == "pickands" and res.boundary == "interior"
    mu = 10 / mpmath.e ** mpmath.mpf("0.2")
    a = mpmath.mpf("0.5") * mpmath.e ** mpmath.mpf("-0.4")
    b = mpmath.mpf("0.1")
    g = mpmath.mpf("0.5")
    alpha = mpmath.mpf("0.4")
    ref = (2 * h_alpha * a ** (1 / alpha) * b ** (-1 / g) * mpmath.gamma(1 / g + 1)
           * mu ** (2 / alpha - 2 / g) * mpmath.ncdf(-mu))
    assert res.mu == pytest.approx(float(mu), rel=1e-14)
    assert res.value == pytest.approx(float(ref), rel=1e-12)


def _pickands_provider(alpha, value):
    p = ConstantsProvider()
    p.add_override("pickands", alpha, value)
    return p


def test_interior_to_endpoint_halves_pickands_prefactor():
    inner = evaluate(Scenario(PICKANDS_PEAK, "thm1"), 10.0, _pickands_provider(0.4, 1.2))
    edge_hf = PeakPerturbation(t_star=E, h_star=0.2, c=0.1, gamma=0.5, t1=1.0, t2=E)
    edge = evaluate(Scenario(edge_hf, "thm1"), 10.0, _pickands_provider(0.4, 1.2))
    assert inner.log_prefactor - edge.log_prefactor == pytest.approx(math.log(2), abs=1e-14)


def test_trivial_regime_is_psi_mu():
    hf = PeakPerturbation(t_star=E, h_star=0.8, c=0.3, gamma=0.5, t1=1.0, t2=2 * E)
    res = quiet(evaluate, Scenario(hf, "thm1"), 5.0)
    assert res.regime == "trivial"
    assert res.value == pytest.approx(float(normal_tail(5 * math.exp(-0.8))), rel=1e-13)


def test_thm2_i_prefactor():
    sc = Scenario(LogReciprocal(t1=3.0, t2=10.0), "thm2_i")
    res = evaluate(sc, 10.0, everything(0.9))
    mu = 10 / E
    assert res.mu == pytest.approx(mu, rel=1e-15)
    alpha = 2 / math.log(10)
    a = 0.5 * 10 ** (-alpha)
    b = 2 / (alpha ** 2 * 10 * math.log(10) ** 2)
    pre = 0.9 * a ** (1 / alpha) / b * mu ** (2 / alpha) / math.log(mu)
    assert res.prefactor == pytest.approx(pre, rel=1e-12)
    assert b == pytest.approx(1 / 20, rel=1e-14)


def test_thm2_i_needs_mu_above_e():
    sc = Scenario(LogReciprocal(t1=3.0, t2=10.0), "thm2_i")
    with pytest.raises(PreconditionError):
        quiet(evaluate, sc, 7.0, everything())


def test_brownian_is_reflection_principle():
    sc = Scenario(Constant(h=0.5, t1=0.0, t2=1.0), "thm2_iii")
    p = ConstantsProvider()
    p.add_override("piterbarg_one_sided", 1.0, 2.0, a=1.0)
    for u in (3.0, 5.0, 10.0):
        res = evaluate(sc, u, p)
        assert res.regime == "piterbarg"
        assert res.value == pytest.approx(2 * float(normal_tail(u)), rel=1e-13)


def test_thm2_ii_and_iii_agree_on_shared_scenario():
    hf = PowerLaw(c=0.3, gamma=1.0, t1=1.0, t2=2.0)
    ii = evaluate(Scenario(hf, "thm2_ii"), 7.0)
    iii = evaluate(Scenario(hf, "thm2_iii"), 7.0)
    assert ii.regime == iii.regime == "trivial"
    assert ii.value == pytest.approx(iii.value, rel=1e-14)


def test_regime_switches_exactly_at_alpha():
    for gam in (0.4 - 1e-9, 0.4, 0.4 + 1e-9):
        hf = PeakPerturbation(t_star=E, h_star=0.2, c=0.1, gamma=gam, t1=1.0, t2=E + 1.5)
        res = quiet(evaluate, Scenario(hf, "thm1"), 10.0, everything(1.5))
        expect = "trivial" if gam < 0.4 else ("piterbarg" if gam == 0.4 else "pickands")
        assert res.regime == expect
        assert math.isfinite(res.log_value)


def test_log_domain_and_monotone_curve():
    sc = Scenario(PowerLaw(c=0.3, gamma=1.0, t1=1.0, t2=2.0), "thm2_iii")
    curve = asymptotic_curve(sc, [6.0, 8.0, 12.0, 20.0, 50.0, 80.0])
    vals = [r.log_value for r in curve]
    assert all(x > y for x, y in zip(vals, vals[1:]))
    assert math.isfinite(curve[-1].log_value)
    assert curve[-1].value == 0.0
    single = asymptotic_curve(sc, [8.0])
    assert single[0].to_dict() == evaluate(sc, 8.0).to_dict()


@pytest.mark.parametrize("u", [20.0, 40.0])
def test_scaling_sanity(u):
    sc = Scenario(LogReciprocal(t1=3.0, t2=10.0), "thm2_i")
    r1, r2 = evaluate(sc, u, everything(0.9)), evaluate(sc, 2 * u, everything(0.9))
    assert r2.mu == pytest.approx(2 * r1.mu)
    assert r2.log_value / r1.log_value == pytest.approx(4.0, rel=0.05)


def test_warning_and_precondition_thresholds():
    sc = Scenario(PowerLaw(c=0.3, gamma=1.0, t1=1.0, t2=2.0), "thm2_iii")
    with pytest.warns(AsymptoticWarning):
        evaluate(sc, 2.0 * 2 ** 0.6)
    with pytest.raises(PreconditionError):
        evaluate(sc, 0.9 * 2 ** 0.6)


def test_missing_constant_is_explicit():
    with pytest.raises(MissingConstantError, match="pickands"):
        evaluate(Scenario(LogReciprocal(t1=3.0, t2=10.0), "thm2_i"), 20.0)


def test_provider_prefers_overrides_then_estimates():
    p = ConstantsProvider(estimates=[ConstantEstimate(kind="pickands", alpha=1.0, value=0.97)])
    assert p.get("pickands", 1.0) == 0.97
    p.add_override("pickands", 1.0, 1.0)
    assert p.get("pickands", 1.0 + 1e-12) == 1.0
    with pytest.raises(MissingConstantError):
        p.get("pickands", 1.1)


def test_provider_runs_protocol_once():
    p = ConstantsProvider(protocol=ConstantsProtocol(delta=0.05, S_list=(1.0, 2.0, 4.0), reps=300, seed=1))
    v = quiet(p.get, "pickands", 1.0)
    assert v > 0 and len(p.estimates) == 1
    assert p.get("pickands", 1.0) == v and len(p.estimates) == 1


def test_required_constant():
    assert required_constant(Scenario(PICKANDS_PEAK, "thm1"), 10.0) == ("pickands", 0.4, None)
    br = Scenario(Constant(h=0.5, t1=0.0, t2=1.0), "thm2_iii")
    kind, alpha, a = required_constant(br, 3.0)
    assert kind == "piterbarg_one_sided" and alpha == 1.0 and a == pytest.approx(1.0)
    assert required_constant(Scenario(PowerLaw(c=0.3, gamma=1.0, t1=1.0, t2=2.0), "thm2_iii"), 6.0) is None


@pytest.mark.parametrize("hf, case", [
    (Constant(h=0.5, t1=0.0, t2=1.0), "thm1"),
    (PeakPerturbation(t_star=E, h_star=0.25, c=0.1, gamma=1.2, t1=1.0, t2=4.0), "thm1"),
    (PeakPerturbation(t_star=0.8, h_star=0.3, c=0.1, gamma=0.5, t1=0.5, t2=1.5), "thm1"),
    (PowerLaw(c=0.3, gamma=1.0, t1=1.0, t2=2.0), "thm2_i"),
    (Constant(h=0.5, t1=0.0, t2=1.0), "thm2_ii"),
    (PeakPerturbation(t_star=2.0, h_star=0.6, c=0.05, gamma=1.5, t1=1.0, t2=3.0), "thm2_iii"),
    (PowerLaw(c=0.5, gamma=0.5, t1=0.02, t2=0.1), "thm2_iii"),
])
def test_invalid_scenarios(hf, case):
    with pytest.raises(PreconditionError):
        Scenario(hf, case)
