"""Second-order structure of standard multifractional Brownian motion."""
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, PreconditionError
from .hurst import Constant, HurstFunction, LogReciprocal, PeakPerturbation, PowerLaw
from .special import gamma, log_gamma

CASES = ("thm1", "thm2_i", "thm2_ii", "thm2_iii")


def _check_unit_open(*xs):
    for x in xs:
        x = np.asarray(x, dtype=float)
        if np.any(~(x > 0) | ~(x < 1)):
            raise DomainError("Hurst arguments must lie in the open interval (0, 1)")


def d_kernel(x, y):
    """Normalising kernel D(x, y) of the mBm covariance; D(x, x) = 1/2."""
    _check_unit_open(x, y)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    # ordered arguments make the kernel symmetric bit for bit
    x, y = np.minimum(x, y), np.maximum(x, y)
    log_num = 0.5 * (log_gamma(2 * x + 1) + log_gamma(2 * y + 1)
                     + np.log(np.sin(np.pi * x)) + np.log(np.sin(np.pi * y)))
    log_den = math.log(2.0) + log_gamma(x + y + 1) + np.log(np.sin(np.pi * (x + y) / 2))
    out = np.exp(log_num - log_den)
    return out[()] if out.ndim == 0 else out


def c_normalization(x):
    """C(x) = sqrt(pi / (x Gamma(2x) sin(pi x))), the harmonizable-form normaliser."""
    _check_unit_open(x)
    x = np.asarray(x, dtype=float)
    out = np.sqrt(np.pi / (x * gamma(2 * x) * np.sin(np.pi * x)))
    return out[()] if out.ndim == 0 else out


@dataclass(frozen=True)
class CovarianceModel:
    hurst: HurstFunction

    @property
    def domain(self):
        return self.hurst.domain

    def autocov(self, s, t):
        s = np.asarray(s, dtype=float)
        t = np.asarray(t, dtype=float)
        hs = self.hurst.value(s)
        ht = self.hurst.value(t)
        p = hs + ht
        out = d_kernel(hs, ht) * (np.power(s, p) + np.power(t, p) - np.power(np.abs(t - s), p))
        return out[()] if np.ndim(out) == 0 else out

    def variance(self, t):
        t = np.asarray(t, dtype=float)
        out = np.power(t, 2 * self.hurst.value(t))
        return out[()] if np.ndim(out) == 0 else out

    def sigma(self, t):
        """Standard deviation t**H(t) (zero at t = 0)."""
        t = np.asarray(t, dtype=float)
        h = self.hurst.value(t)
        with np.errstate(divide="ignore"):
            out = np.where(t > 0, np.exp(h * np.log(np.where(t > 0, t, 1.0))), 0.0)
        return out[()] if out.ndim == 0 else out

    def correlation(self, s, t):
        s = np.asarray(s, dtype=float)
        t = np.asarray(t, dtype=float)
        if np.any(s <= 0) or np.any(t <= 0):
            raise DomainError("correlation is undefined at t = 0 (zero variance)")
        return self.autocov(s, t) / (self.sigma(s) * self.sigma(t))

    def matrix(self, times):
        """Covariance matrix on ``times``, symmetric bit for bit."""
        times = np.asarray(times, dtype=float)
        k = self.autocov(times[:, None], times[None, :])
        upper = np.triu(k)
        return upper + np.triu(k, 1).T


@dataclass(frozen=True)
class LocalExpansion:
    """sigma(center + direction*h) ~ scale * (1 - coeff * |h|**exponent) and
    r(s, t) ~ 1 - corr_a |s - t|**corr_alpha near ``center``.

    ``direction`` is +1 (right neighbourhood), -1 (left) or 0 (two-sided).
    """
    center: float
    scale: float
    coeff: float
    exponent: float
    corr_a: float
    corr_alpha: float
    direction: int

    def sigma_ratio(self, model, h):
        """(1 - sigma(center + d h)/sigma(center)) / (coeff h**exponent) for h > 0."""
        h = np.asarray(h, dtype=float)
        d = self.direction if self.direction != 0 else 1
        t = self.center + d * h
        return (1.0 - model.sigma(t) / self.scale) / (self.coeff * np.power(h, self.exponent))


def correlation_ratio(model, t, h):
    """(1 - r(t, t+h)) / (1/2 t**(-2H(t)) h**(2H(t))); tends to 1 as h -> 0."""
    t = float(t)
    h = np.asarray(h, dtype=float)
    ht = float(model.hurst.value(t))
    lead = 0.5 * t ** (-2 * ht) * np.power(h, 2 * ht)
    return (1.0 - model.correlation(t, t + h)) / lead


def local_expansion_at(model, t0, case, direction=None):
    """Leading-order variance and correlation expansion at the point where the
    tail asymptotics localise, with the decay coefficient ``b`` of ``case``."""
    if case not in CASES:
        raise DomainError(f"unknown case {case!r}; expected one of {CASES}")
    hf = model.hurst
    t0 = float(t0)
    if not t0 > 0:
        raise PreconditionError("expansion point must be > 0")
    h0 = float(hf.value(t0))
    alpha = 2 * h0
    corr_a = 0.5 * t0 ** (-2 * h0)
    scale = float(model.sigma(t0))

    if case == "thm1":
        if not isinstance(hf, PeakPerturbation):
            raise PreconditionError(f"case thm1 needs a 'peak' Hurst function, got {hf.kind!r}")
        if t0 != hf.t_star:
            raise PreconditionError("thm1 expansion must be taken at t_star")
        if not t0 > 1:
            raise PreconditionError(
                f"thm1 needs t_star > 1 so that b = c ln t_star > 0 (t_star = {t0})")
        coeff, exponent = hf.c * math.log(t0), hf.gamma
        direction = 0 if direction is None else direction
    elif case == "thm2_i":
        if not isinstance(hf, LogReciprocal):
            raise PreconditionError(f"case thm2_i needs 'log_reciprocal', got {hf.kind!r}")
        lt = math.log(t0)
        coeff, exponent = 2.0 / (alpha ** 2 * t0 * lt ** 2), 1.0
        direction = -1 if direction is None else direction
    elif case == "thm2_ii":
        if not isinstance(hf, PowerLaw):
            raise PreconditionError(f"case thm2_ii needs 'power_law', got {hf.kind!r}")
        c, g = hf.c, hf.gamma
        coeff, exponent = c * t0 ** (g - 1) * abs(1 + g * math.log(t0)), 1.0
        if coeff == 0:
            raise PreconditionError("thm2_ii: b vanishes at the stationary point t = exp(-1/gamma)")
        if direction is None:
            direction = 1 if t0 == hf.t1 else -1
    else:
        if not hf.is_differentiable():
            raise PreconditionError(f"case thm2_iii needs a differentiable H, got {hf.kind!r}")
        coeff = h0 / t0 + float(hf.derivative(t0)) * math.log(t0)
        exponent = 1.0
        if not coeff > 0:
            raise PreconditionError(f"thm2_iii: b = H(T2)/T2 + H'(T2) ln T2 = {coeff:.6g} is not positive")
        direction = -1 if direction is None else direction

    return LocalExpansion(center=t0, scale=scale, coeff=coeff, exponent=exponent,
                          corr_a=corr_a, corr_alpha=alpha, direction=int(direction))


__all__ = [
    "CASES", "Constant", "CovarianceModel", "LocalExpansion", "c_normalization",
    "correlation_ratio", "d_kernel", "local_expansion_at",
]
