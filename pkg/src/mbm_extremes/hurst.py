"""Hurst functionals H(t) on a closed interval [t1, t2].

Each variant is an immutable dataclass with vectorised ``value`` and
``derivative``. Construction validates that H stays inside [h_lo, h_hi]
on a dense grid.
"""
import math
from dataclasses import dataclass, field, fields

import numpy as np
from scipy.interpolate import PchipInterpolator

from .errors import ConfigError, DomainError

_VALIDATION_POINTS = 4097


@dataclass(frozen=True, kw_only=True)
class HurstFunction:
    t1: float
    t2: float
    h_lo: float = 0.05
    h_hi: float = 0.95

    kind = "abstract"

    def __post_init__(self):
        if not (math.isfinite(self.t1) and math.isfinite(self.t2)):
            raise DomainError("interval endpoints must be finite")
        if not 0.0 <= self.t1 < self.t2:
            raise DomainError(f"need 0 <= t1 < t2, got [{self.t1}, {self.t2}]")
        if not 0.0 < self.h_lo <= self.h_hi < 1.0:
            raise DomainError(f"range bounds must satisfy 0 < h_lo <= h_hi < 1, got [{self.h_lo}, {self.h_hi}]")
        self._validate_params()
        grid = self.validation_grid()
        h = self._value(grid)
        if not np.all(np.isfinite(h)):
            raise DomainError(f"{self.kind}: H(t) is not finite on [{self.t1}, {self.t2}]")
        lo, hi = float(h.min()), float(h.max())
        if lo < self.h_lo or hi > self.h_hi:
            raise DomainError(
                f"{self.kind}: H(t) ranges over [{lo:.6g}, {hi:.6g}] on [{self.t1}, {self.t2}], "
                f"outside the admissible [{self.h_lo}, {self.h_hi}]"
            )

    def _validate_params(self):
        pass

    def validation_grid(self):
        return np.linspace(self.t1, self.t2, _VALIDATION_POINTS)

    @property
    def domain(self):
        return (self.t1, self.t2)

    def _check_domain(self, t):
        t = np.asarray(t, dtype=float)
        slack = 1e-12 * max(1.0, abs(self.t2))
        if np.any(t < self.t1 - slack) or np.any(t > self.t2 + slack) or np.any(~np.isfinite(t)):
            raise DomainError(f"t outside the domain [{self.t1}, {self.t2}]")
        return np.clip(t, self.t1, self.t2)

    def value(self, t):
        t = self._check_domain(t)
        out = self._value(t)
        return out[()] if np.ndim(out) == 0 else out

    def derivative(self, t):
        t = self._check_domain(t)
        out = self._derivative(t)
        return out[()] if np.ndim(out) == 0 else out

    __call__ = value

    def is_differentiable(self):
        return True

    def params(self):
        """Variant parameters as a plain dict (round-trips through ``hurst_from_dict``)."""
        d = {"variant": self.kind}
        for f in fields(self):
            v = getattr(self, f.name)
            d[f.name] = list(v) if isinstance(v, tuple) else v
        return d


@dataclass(frozen=True, kw_only=True)
class Constant(HurstFunction):
    h: float
    kind = "constant"

    def _value(self, t):
        return np.full(np.shape(t), float(self.h))

    def _derivative(self, t):
        return np.zeros(np.shape(t))


@dataclass(frozen=True, kw_only=True)
class PowerLaw(HurstFunction):
    """H(t) = c * t**gamma."""
    c: float
    gamma: float
    kind = "power_law"

    def _validate_params(self):
        if not (self.c > 0 and self.gamma > 0):
            raise DomainError("power_law needs c > 0 and gamma > 0")

    def _value(self, t):
        return self.c * np.power(t, self.gamma)

    def _derivative(self, t):
        return self.c * self.gamma * np.power(t, self.gamma - 1.0)


@dataclass(frozen=True, kw_only=True)
class LogReciprocal(HurstFunction):
    """H(t) = 1 / ln t on an interval to the right of e, so sigma(t) = e throughout."""
    kind = "log_reciprocal"

    def _validate_params(self):
        if not self.t1 > math.e:
            raise DomainError(f"log_reciprocal requires t1 > e, got t1 = {self.t1}")

    def _value(self, t):
        return 1.0 / np.log(t)

    def _derivative(self, t):
        lt = np.log(t)
        return -1.0 / (t * lt * lt)


@dataclass(frozen=True, kw_only=True)
class PeakPerturbation(HurstFunction):
    """H(t) = h_star - c |t - t_star|**gamma, an exact local maximum of H at t_star."""
    t_star: float
    h_star: float
    c: float
    gamma: float
    kind = "peak"

    def _validate_params(self):
        if not (self.c > 0 and self.gamma > 0):
            raise DomainError("peak needs c > 0 and gamma > 0")
        if not self.t1 <= self.t_star <= self.t2:
            raise DomainError(f"t_star = {self.t_star} is outside [{self.t1}, {self.t2}]")

    def validation_grid(self):
        return np.union1d(super().validation_grid(), [self.t_star])

    def _value(self, t):
        return self.h_star - self.c * np.power(np.abs(t - self.t_star), self.gamma)

    def _derivative(self, t):
        h = t - self.t_star
        if self.gamma <= 1.0 and np.any(h == 0):
            raise DomainError(f"peak: H is not differentiable at t_star = {self.t_star}")
        with np.errstate(divide="ignore", invalid="ignore"):
            d = -self.c * self.gamma * np.sign(h) * np.power(np.abs(h), self.gamma - 1.0)
        return np.where(h == 0, 0.0, d)

    def is_differentiable(self):
        return self.gamma > 1.0


@dataclass(frozen=True, kw_only=True)
class Tabulated(HurstFunction):
    """Monotone-cubic (PCHIP) interpolation through (knots_t, knots_h).

    The domain defaults to the knot span; t1/t2 must lie within it.
    """
    knots_t: tuple
    knots_h: tuple
    t1: float = None
    t2: float = None
    _interp: object = field(init=False, repr=False, compare=False)
    kind = "tabulated"

    def __post_init__(self):
        kt = tuple(float(x) for x in self.knots_t)
        kh = tuple(float(x) for x in self.knots_h)
        if len(kt) != len(kh) or len(kt) < 2:
            raise DomainError("tabulated needs at least two (t, H) knots of equal length")
        if np.any(np.diff(kt) <= 0):
            raise DomainError("tabulated knots must be strictly increasing in t")
        object.__setattr__(self, "knots_t", kt)
        object.__setattr__(self, "knots_h", kh)
        if self.t1 is None:
            object.__setattr__(self, "t1", kt[0])
        if self.t2 is None:
            object.__setattr__(self, "t2", kt[-1])
        if self.t1 < kt[0] or self.t2 > kt[-1]:
            raise DomainError("tabulated domain must lie within the knot span")
        object.__setattr__(self, "_interp", PchipInterpolator(kt, kh, extrapolate=False))
        super().__post_init__()

    def validation_grid(self):
        inner = [k for k in self.knots_t if self.t1 <= k <= self.t2]
        return np.union1d(super().validation_grid(), inner)

    def _value(self, t):
        return self._interp(t)

    def _derivative(self, t):
        return self._interp.derivative()(t)

    def params(self):
        d = super().params()
        d.pop("_interp", None)
        return d


VARIANTS = {cls.kind: cls for cls in (Constant, PowerLaw, LogReciprocal, PeakPerturbation, Tabulated)}


def hurst_from_dict(d):
    """Build a HurstFunction from ``{"variant": ..., **params}``."""
    d = dict(d)
    kind = d.pop("variant", None)
    if kind not in VARIANTS:
        raise ConfigError(f"unknown hurst variant {kind!r}; expected one of {sorted(VARIANTS)}")
    cls = VARIANTS[kind]
    allowed = {f.name for f in fields(cls) if f.init}
    unknown = set(d) - allowed
    if unknown:
        raise ConfigError(f"unknown parameter(s) {sorted(unknown)} for hurst variant {kind!r}")
    try:
        return cls(**d)
    except TypeError as exc:
        raise ConfigError(f"hurst variant {kind!r}: {exc}") from None


@dataclass(frozen=True)
class HolderCertificate:
    c_hat: float
    ok: bool
    growth: float
    h_max: float


def _pairwise_holder_max(t, h, lam, chunk=512):
    best = 0.0
    n = len(t)
    for i in range(0, n, chunk):
        ti, hi = t[i:i + chunk, None], h[i:i + chunk, None]
        dt = np.abs(ti - t[None, :])
        dh = np.abs(hi - h[None, :])
        with np.errstate(divide="ignore", invalid="ignore"):
            q = np.where(dt > 0, dh / dt ** lam, 0.0)
        best = max(best, float(q.max()))
    return best


def holder_certificate(hf, lam, grid_n=513):
    """Empirical Hölder check of |H(t) - H(s)| <= C |t - s|**lam on a grid.

    ``c_hat`` is the largest grid quotient. Boundedness is judged by
    refining the grid (n -> 2n - 1): a Hölder-lam function keeps the
    quotient essentially fixed, while a rougher one grows without bound.
    ``ok`` also requires H(t) <= min(1, lam) on the grid.
    """
    if grid_n < 2:
        raise DomainError("grid_n must be >= 2")
    if lam <= 0:
        raise DomainError("Hölder exponent must be positive")
    coarse = np.linspace(hf.t1, hf.t2, grid_n)
    fine = np.linspace(hf.t1, hf.t2, 2 * grid_n - 1)
    c_coarse = _pairwise_holder_max(coarse, hf.value(coarse), lam)
    h_fine = hf.value(fine)
    c_fine = _pairwise_holder_max(fine, h_fine, lam)
    if c_coarse > 0:
        growth = c_fine / c_coarse
    else:
        growth = 1.0 if c_fine == 0 else math.inf
    h_max = float(h_fine.max())
    ok = math.isfinite(c_fine) and growth <= 1.1 and h_max <= min(1.0, lam)
    return HolderCertificate(c_hat=c_fine, ok=bool(ok), growth=growth, h_max=h_max)
