"""Random valid scenarios for the parameter audit, one generator per case tag."""
import math

import numpy as np
from scipy.optimize import brentq

from mbm_extremes.asymptotics import Scenario
from mbm_extremes.errors import DomainError
from mbm_extremes.hurst import Constant, LogReciprocal, PeakPerturbation, PowerLaw, Tabulated


def _thm1(rng):
    t_star = rng.uniform(1.2, 4.0)
    gamma = rng.uniform(0.2, 0.95)
    regime = rng.integers(0, 3)
    if regime == 0:
        h_star = gamma / 2 * rng.uniform(0.3, 0.95)
    elif regime == 1:
        h_star = gamma / 2
    else:
        h_star = min(0.9, gamma / 2 * rng.uniform(1.05, 3.0))
    c = rng.uniform(0.02, 0.3)
    left = t_star if rng.random() < 0.2 else max(1.0, t_star - rng.uniform(0.1, 1.0))
    right = t_star if rng.random() < 0.2 and left != t_star else t_star + rng.uniform(0.1, 1.0)
    return PeakPerturbation(t_star=t_star, h_star=h_star, c=c, gamma=gamma, t1=left, t2=right)


def _thm2_i(rng):
    t1 = rng.uniform(3.0, 6.0)
    return LogReciprocal(t1=t1, t2=t1 + rng.uniform(0.5, 20.0))


def _sigma_pl(c, g, t):
    return math.exp(c * t ** g * math.log(t))


def _thm2_ii(rng):
    c = rng.uniform(0.1, 0.5)
    g = rng.uniform(0.3, 1.5)
    tt = math.exp(-1 / g)
    kind = rng.integers(0, 4)
    if kind == 0:  # sigma decreasing: interval left of the minimum of sigma
        t2 = tt * rng.uniform(0.5, 0.95)
        t1 = t2 * rng.uniform(0.3, 0.9)
    elif kind == 1:  # sigma increasing; H(T2) drawn directly, sometimes exactly 1/2
        t1 = tt * rng.uniform(1.05, 3.0)
        t2 = t1 * rng.uniform(1.1, 2.0)
        c = (0.5 if rng.random() < 0.3 else rng.uniform(0.1, 0.9)) / t2 ** g
    elif kind == 2:  # straddles the minimum
        t1 = tt * rng.uniform(0.3, 0.9)
        t2 = tt * rng.uniform(1.1, 3.0)
    else:  # exact tie sigma(T1) = sigma(T2)
        # sigma dips below 1 on (0, 1) with its minimum at tt, so ties need T2 < 1
        t2 = tt + rng.uniform(0.2, 0.9) * (1 - tt)
        target = _sigma_pl(c, g, t2)
        t1 = brentq(lambda t: _sigma_pl(c, g, t) - target, 1e-9, tt, xtol=1e-16)
    return PowerLaw(c=c, gamma=g, t1=t1, t2=t2)


def _thm2_iii(rng):
    kind = rng.integers(0, 3)
    t2 = rng.uniform(1.2, 3.0)
    t1 = rng.uniform(0.6, t2 - 0.1)
    h2 = 0.5 if rng.random() < 0.25 else rng.uniform(0.1, 0.9)
    if kind == 0:
        return Constant(h=h2, t1=t1, t2=t2)
    if kind == 1:
        g = rng.uniform(0.3, 1.5)
        c = h2 / t2 ** g
        return PowerLaw(c=c, gamma=g, t1=t1, t2=t2)
    h = np.sort(rng.uniform(0.1, 0.9, 4))
    knots = np.linspace(t1, t2, 4)
    return Tabulated(knots_t=tuple(knots), knots_h=tuple(h))


GENERATORS = {"thm1": _thm1, "thm2_i": _thm2_i, "thm2_ii": _thm2_ii, "thm2_iii": _thm2_iii}


def random_scenarios(n_per_case, seed):
    rng = np.random.default_rng(seed)
    out = []
    for case, gen in GENERATORS.items():
        got = 0
        while got < n_per_case:
            try:
                sc = Scenario(gen(rng), case)
            except DomainError:
                continue
            out.append(sc)
            got += 1
    return out


def _compare(alpha, rate):
    # equality is up to rounding in how alpha was produced (documented tolerance 1e-12)
    if abs(alpha - rate) <= 1e-12:
        return "piterbarg"
    return "pickands" if alpha < rate else "trivial"


def direct_parameters(sc, u):
    """mu, a, b, alpha, Q, critical point and regime recomputed from the closed-form definitions."""
    hf = sc.hurst
    if sc.case == "thm1":
        t, h = hf.t_star, hf.h_star
        alpha = 2 * h
        b = hf.c * math.log(t)
        regime = _compare(alpha, hf.gamma)
        return dict(mu=u / t ** h, a=0.5 * t ** (-2 * h), b=b, alpha=alpha, Q=1, critical_point=t,
                    regime=regime)
    if sc.case == "thm2_i":
        t = hf.t2
        alpha = 2 / math.log(t)
        return dict(mu=u / math.e, a=0.5 * t ** (-alpha), b=2 / (alpha ** 2 * t * math.log(t) ** 2),
                    alpha=alpha, Q=1, critical_point=t, regime="pickands")
    if sc.case == "thm2_ii":
        c, g = hf.c, hf.gamma
        s1, s2 = hf.t1 ** (c * hf.t1 ** g), hf.t2 ** (c * hf.t2 ** g)
        if abs(s1 - s2) <= sc.tie_tol * max(s1, s2):
            q, t = 2, hf.t2
        else:
            q, t = 1, (hf.t1 if s1 > s2 else hf.t2)
        alpha = 2 * c * t ** g
        b = c * t ** (g - 1) * abs(1 + g * math.log(t))
    else:
        q, t = 1, hf.t2
        h = float(hf.value(t))
        alpha = 2 * h
        b = h / t + float(hf.derivative(t)) * math.log(t)
    regime = _compare(alpha, 1.0)
    return dict(mu=u / t ** (alpha / 2), a=0.5 * t ** (-alpha), b=b, alpha=alpha, Q=q,
                critical_point=t, regime=regime)
