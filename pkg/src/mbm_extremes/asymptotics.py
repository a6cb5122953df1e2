"""Exact tail asymptotics of P(sup_{[T1,T2]} B_H > u) as u -> infinity.

Four cases, tagged by the shape of H:

``thm1``
    H has an exact cusp maximum H(t*) - c|t - t*|^gamma, gamma in (0, 1),
    and sigma(t) = t^H(t) peaks uniquely at t* > 1.
``thm2_i``
    H(t) = 1/ln t on [T1, T2], T1 > e (sigma is constant = e).
``thm2_ii``
    H(t) = c t^gamma; sigma peaks at one or both endpoints.
``thm2_iii``
    H differentiable and monotone with sigma maximal at T2.

Everything is evaluated in the log domain; ``value`` may underflow to 0
while ``log_value`` stays finite.
"""
import math
import warnings
from dataclasses import asdict, dataclass, field

import numpy as np

from .constants_mc import ConstantEstimate, ConstantsProtocol, estimate
from .covariance import CASES, CovarianceModel, local_expansion_at
from .errors import AsymptoticWarning, MissingConstantError, PreconditionError
from .hurst import LogReciprocal, PeakPerturbation, PowerLaw
from .special import log_gamma, log_normal_tail

TIE_TOL = 1e-9
# |alpha - gamma| below this counts as equality when choosing the regime
REGIME_TOL = 1e-12
MU_WARN = 3.0
_CHECK_POINTS = 4097


@dataclass(frozen=True)
class Scenario:
    hurst: object
    case: str
    tie_tol: float = TIE_TOL

    def __post_init__(self):
        if self.case not in CASES:
            raise PreconditionError(f"unknown case tag {self.case!r}; expected one of {CASES}")
        validate_scenario(self)

    @property
    def interval(self):
        return self.hurst.domain

    @property
    def model(self):
        return CovarianceModel(self.hurst)

    def to_dict(self):
        return {"case_tag": self.case, "hurst": self.hurst.params(), "interval": list(self.interval)}


def _grid(hf, extra=()):
    return np.union1d(np.linspace(hf.t1, hf.t2, _CHECK_POINTS), list(extra))


def validate_scenario(sc):
    hf, case = sc.hurst, sc.case
    model = CovarianceModel(hf)
    if case == "thm1":
        if not isinstance(hf, PeakPerturbation):
            raise PreconditionError(f"case_tag thm1 needs hurst variant 'peak', got {hf.kind!r}")
        if not 0 < hf.gamma < 1:
            raise PreconditionError(f"thm1 needs gamma in (0, 1), got {hf.gamma}")
        if not hf.t_star > 1:
            raise PreconditionError(
                f"thm1 needs t_star > 1 (b = c ln t_star must be positive), got t_star = {hf.t_star}")
        t = _grid(hf, [hf.t_star])
        s = model.sigma(t)
        top = model.sigma(hf.t_star)
        others = s[t != hf.t_star]
        if np.any(others >= top):
            bad = t[t != hf.t_star][np.argmax(others)]
            raise PreconditionError(
                f"thm1 needs sigma to peak uniquely at t_star = {hf.t_star}; "
                f"sigma({bad:.6g}) = {others.max():.6g} >= sigma(t_star) = {top:.6g}")
    elif case == "thm2_i":
        if not isinstance(hf, LogReciprocal):
            raise PreconditionError(f"case_tag thm2_i needs hurst variant 'log_reciprocal', got {hf.kind!r}")
    elif case == "thm2_ii":
        if not isinstance(hf, PowerLaw):
            raise PreconditionError(f"case_tag thm2_ii needs hurst variant 'power_law', got {hf.kind!r}")
    else:
        if not hf.is_differentiable():
            raise PreconditionError(f"case_tag thm2_iii needs a differentiable H, got {hf.kind!r}")
        t = _grid(hf)
        d = hf.derivative(t)
        increasing = bool(np.all(d >= -1e-12))
        decreasing = bool(np.all(d <= 1e-12))
        if not ((decreasing and hf.t2 <= 1) or (increasing and hf.t2 >= 1)):
            raise PreconditionError(
                "thm2_iii needs H decreasing with T2 <= 1 or increasing with T2 >= 1 "
                f"(T2 = {hf.t2}, increasing={increasing}, decreasing={decreasing})")
        s = model.sigma(t)
        if np.any(s[:-1] >= s[-1]):
            raise PreconditionError(
                f"thm2_iii: sigma does not attain its maximum uniquely at T2 = {hf.t2} "
                f"(sigma({t[np.argmax(s[:-1])]:.6g}) >= sigma(T2))")


@dataclass
class AsymptoticResult:
    case: str
    u: float
    mu: float
    a: float
    b: float
    alpha: float
    decay_exponent: float
    regime: str
    Q: int
    critical_point: float
    boundary: str
    constant_kind: str = None
    constant_ratio: float = None
    constant_value: float = None
    log_prefactor: float = None
    prefactor: float = None
    log_value: float = None
    value: float = None
    two_endpoint: dict = None
    notes: list = field(default_factory=list)

    def to_dict(self):
        return asdict(self)


@dataclass
class ConstantsProvider:
    """Supplies H_alpha, P_alpha^a and P~_alpha^a to the tail formulas.

    Lookups try fixed overrides, then stored Monte Carlo estimates, then
    (if a protocol is set) run the estimator once and cache it. Matching on
    alpha and a is to ``tol`` relative; nothing is ever interpolated.
    """
    overrides: dict = field(default_factory=dict)
    estimates: list = field(default_factory=list)
    protocol: ConstantsProtocol = None
    tol: float = 1e-9

    def add_override(self, kind, alpha, value, a=None):
        self.overrides[(kind, float(alpha), None if a is None else float(a))] = float(value)

    def _close(self, x, y):
        if x is None or y is None:
            return x is None and y is None
        return math.isclose(x, y, rel_tol=self.tol, abs_tol=self.tol)

    def get(self, kind, alpha, a=None):
        if kind == "pickands":
            a = None
        for (k, al, aa), v in self.overrides.items():
            if k == kind and self._close(al, alpha) and self._close(aa, a):
                return v
        for est in self.estimates:
            if est.kind == kind and est.quantity == "limit" and self._close(est.alpha, alpha) \
                    and self._close(est.a, a):
                return est.value
        if self.protocol is not None:
            est = estimate(kind, alpha, a, self.protocol)
            self.estimates.append(est)
            return est.value
        what = f"{kind}(alpha={alpha!r}" + ("" if a is None else f", a={a!r}") + ")"
        raise MissingConstantError(f"no value available for {what}; supply an override or a protocol")


def _regime(alpha, rate):
    if abs(alpha - rate) <= REGIME_TOL:
        return "piterbarg"
    return "pickands" if alpha < rate else "trivial"


def _endpoint_params(sc, t, direction, u):
    model = sc.model
    exp = local_expansion_at(model, t, sc.case, direction)
    mu = u / exp.scale
    return exp, mu


def classify(sc, u):
    """Locate the critical point and derive mu, a, b, alpha, Q and the regime."""
    hf, case = sc.hurst, sc.case
    model = sc.model
    u = float(u)
    Q = 1
    if case == "thm1":
        crit = hf.t_star
        boundary = "interior" if hf.t1 < crit < hf.t2 else "endpoint"
        rate = hf.gamma
    elif case == "thm2_i":
        crit, boundary, rate = hf.t2, "endpoint", 1.0
    elif case == "thm2_ii":
        s1, s2 = float(model.sigma(hf.t1)), float(model.sigma(hf.t2))
        if abs(s1 - s2) <= sc.tie_tol * max(s1, s2):
            Q, crit, boundary = 2, hf.t2, "two_endpoints"
        elif s1 > s2:
            crit, boundary = hf.t1, "endpoint"
        else:
            crit, boundary = hf.t2, "endpoint"
        rate = 1.0
    else:
        crit, boundary, rate = hf.t2, "endpoint", 1.0

    exp = local_expansion_at(model, crit, case)
    mu = u / exp.scale
    alpha = exp.corr_alpha
    regime = "pickands" if case == "thm2_i" else _regime(alpha, rate)
    return AsymptoticResult(
        case=case, u=u, mu=mu, a=exp.corr_a, b=exp.coeff, alpha=alpha, decay_exponent=rate,
        regime=regime, Q=Q, critical_point=float(crit), boundary=boundary,
    )


def _log_prefactor(res, constants, interior=False):
    """log of the factor multiplying Psi(mu); fills the constant fields of ``res``."""
    a, b, alpha, mu, rate = res.a, res.b, res.alpha, res.mu, res.decay_exponent
    logQ = math.log(res.Q)
    if res.regime == "trivial":
        return logQ
    if res.regime == "piterbarg":
        kind = "piterbarg_two_sided" if interior else "piterbarg_one_sided"
        ratio = b / a
        val = constants.get(kind, alpha, ratio)
        res.constant_kind, res.constant_ratio, res.constant_value = kind, ratio, val
        return logQ + math.log(val)
    h_alpha = constants.get("pickands", alpha)
    res.constant_kind, res.constant_value = "pickands", h_alpha
    base = math.log(h_alpha) + math.log(a) / alpha
    if res.case == "thm2_i":
        return base - math.log(b) + (2 / alpha) * math.log(mu) - math.log(math.log(mu))
    if res.case == "thm1":
        g = rate
        return (math.log(2.0 if interior else 1.0) + base - math.log(b) / g
                + float(log_gamma(1 / g + 1)) + (2 / alpha - 2 / g) * math.log(mu))
    return logQ + base - math.log(b) + (2 / alpha - 2) * math.log(mu)


def _finish(res, log_pre):
    res.log_prefactor = log_pre
    res.prefactor = math.exp(log_pre)
    res.log_value = log_pre + float(log_normal_tail(res.mu))
    res.value = math.exp(res.log_value)
    return res


def _two_endpoint(sc, u, constants):
    """Sum of separate endpoint asymptotics at T1 and T2 (used when sigma ties)."""
    hf = sc.hurst
    parts = {}
    total = []
    for name, t, direction in (("T1", hf.t1, 1), ("T2", hf.t2, -1)):
        exp, mu = _endpoint_params(sc, t, direction, u)
        res = AsymptoticResult(
            case=sc.case, u=float(u), mu=mu, a=exp.corr_a, b=exp.coeff, alpha=exp.corr_alpha,
            decay_exponent=1.0, regime=_regime(exp.corr_alpha, 1.0), Q=1, critical_point=float(t),
            boundary="endpoint")
        _finish(res, _log_prefactor(res, constants))
        parts[name] = {k: getattr(res, k) for k in
                       ("mu", "a", "b", "alpha", "regime", "constant_kind", "constant_ratio",
                        "constant_value", "log_prefactor", "log_value", "value")}
        total.append(res.log_value)
    log_sum = float(np.logaddexp(*total))
    return {"endpoints": parts, "log_value": log_sum, "value": math.exp(log_sum)}


def evaluate(sc, u, constants=None):
    """Asymptotic value of P(sup B_H > u), with every intermediate parameter."""
    constants = constants if constants is not None else ConstantsProvider()
    res = classify(sc, u)
    if not res.mu > 1:
        raise PreconditionError(f"mu = {res.mu:.4g} <= 1: the tail asymptotic is meaningless here")
    if sc.case == "thm2_i" and not res.mu > math.e:
        raise PreconditionError(f"thm2_i needs mu > e so that ln mu > 1 (mu = {res.mu:.4g})")
    if res.mu < MU_WARN:
        msg = f"mu = {res.mu:.3g} < {MU_WARN}: asymptotic regime barely entered"
        warnings.warn(msg, AsymptoticWarning, stacklevel=2)
        res.notes.append(msg)
    _finish(res, _log_prefactor(res, constants, interior=res.boundary == "interior"))
    if res.Q == 2:
        try:
            res.two_endpoint = _two_endpoint(sc, u, constants)
        except MissingConstantError as exc:
            res.notes.append(f"two-endpoint diagnostic skipped: {exc}")
    return res


def asymptotic_curve(sc, u_list, constants=None):
    constants = constants if constants is not None else ConstantsProvider()
    return [evaluate(sc, u, constants) for u in u_list]


CURVE_COLUMNS = ("u", "mu", "regime", "prefactor", "log_value", "value")


def provider_from_estimates(estimates, overrides=None, protocol=None):
    ests = [e if isinstance(e, ConstantEstimate) else ConstantEstimate.from_dict(e) for e in estimates]
    return ConstantsProvider(overrides=dict(overrides or {}), estimates=ests, protocol=protocol)


def required_constant(sc, u):
    """(kind, alpha, a) of the constant the formula at level u needs, or None."""
    res = classify(sc, u)
    if res.regime == "trivial":
        return None
    if res.regime == "piterbarg":
        kind = "piterbarg_two_sided" if res.boundary == "interior" else "piterbarg_one_sided"
        return kind, res.alpha, res.b / res.a
    return "pickands", res.alpha, None
