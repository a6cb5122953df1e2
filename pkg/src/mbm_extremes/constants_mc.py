"""Monte Carlo estimates of the Pickands constant H_alpha and the Piterbarg
constants P_alpha^a (one-sided) and P~_alpha^a (two-sided).

All estimators work from one ensemble of two-sided fBm paths on
[-S_max, S_max], simulated at step delta/2. Every window, side, penalty
``a`` and the coarse step delta are read off that same ensemble, so the
estimates are pathwise coupled:

* P is nonincreasing in ``a`` and two-sided >= one-sided path by path;
* direct window sups are nondecreasing in S and in grid refinement.

Two estimators of the Pickands window expectation H[0,S] are provided.
``direct`` averages sup exp(sqrt2 B - |t|^alpha) as defined; its variance
is enormous (infinite as S grows for alpha >= 1), so slopes fitted from it
are useless at practical replication counts. ``shift`` uses the
change-of-measure identity

    E max_{t in G} e^{W(t)} = |G| * E[ max_{G - tau} e^{W} / sum_{G - tau} e^{W} ],

with tau uniform on the grid G = {0, d, ..., S}, which is exact for the
discrete-grid expectation and has bounded integrand.
"""
import logging
import math
import warnings
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import AsymptoticWarning, DomainError, NumericalError
from .sampler import PRNG_ID, FbmGenerator, Grid, block_rng, block_sizes, map_blocks

log = logging.getLogger(__name__)

KINDS = ("pickands", "piterbarg_one_sided", "piterbarg_two_sided")
_SQRT2 = math.sqrt(2.0)


@dataclass
class ConstantEstimate:
    kind: str
    alpha: float
    a: float = None
    S: float = 0.0
    delta: float = 0.0
    reps: int = 0
    value: float = math.nan
    stderr: float = math.nan
    per_S_curve: list = field(default_factory=list)
    seed: int = 0
    method: str = "direct"
    quantity: str = "limit"
    step_reported: float = 0.0
    coarse_value: float = None
    extrapolated_value: float = None
    mc_stderr: float = math.nan
    S_list: list = field(default_factory=list)
    notes: list = field(default_factory=list)
    prng: str = PRNG_ID

    def to_dict(self):
        d = asdict(self)
        d["per_S_curve"] = [list(row) for row in self.per_S_curve]
        return d

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        d["per_S_curve"] = [tuple(r) for r in d.get("per_S_curve", [])]
        return cls(**d)


@dataclass(frozen=True)
class ConstantsProtocol:
    delta: float = 0.01
    S_list: tuple = (4.0, 8.0, 16.0)
    reps: int = 20000
    seed: int = 0
    method: str = "shift"
    richardson: bool = True


def _check_alpha(alpha):
    if not 0 < alpha <= 2:
        raise DomainError(f"alpha must lie in (0, 2], got {alpha}")


def _steps_per(S, step):
    n = S / step
    k = int(round(n))
    if k < 1 or abs(n - k) > 1e-9 * max(1.0, n):
        raise DomainError(f"horizon S = {S} is not an integer multiple of the step {step}")
    return k


def _levels(delta, richardson):
    # (stride on the simulation grid, step) for each resolution, finest first
    if richardson:
        return [(1, delta / 2), (2, delta)]
    return [(1, delta)]


def _two_sided_generator(alpha, s_max, sim_step):
    half = _steps_per(s_max, sim_step)
    grid = Grid(0.0, 2.0 * s_max, 2 * half + 1)
    return FbmGenerator.build(alpha, grid), half


def _finite(x, what):
    if not np.all(np.isfinite(x)):
        raise NumericalError(f"non-finite {what} in a Monte Carlo replication (sampler fault)")
    return x


def _simulate(alpha, S_list, delta, reps, seed, richardson, stat_fns, workers=1):
    """Run ``stat_fns`` on every block of centred two-sided paths.

    Each stat fn receives (W, times, centre, levels, u) and returns a
    (block_reps x k) array. Results are stacked over blocks.
    """
    levels = _levels(delta, richardson)
    s_max = max(S_list)
    gen, centre = _two_sided_generator(alpha, s_max, levels[0][1])
    times = (np.arange(gen.grid.n) - centre) * levels[0][1]
    br = gen.block_reps

    def run(k, size):
        x = gen.paths(block_rng(seed, k, 0), size)
        w = x - x[:, centre:centre + 1]
        u = block_rng(seed, k, 1).random(size)
        return [fn(w, times, centre, levels, u) for fn in stat_fns]

    chunks = list(map_blocks(run, block_sizes(reps, br), workers))
    return [np.vstack([c[i] for c in chunks]) for i in range(len(stat_fns))]


def _drift_term(times, alpha, a):
    return (1.0 + a) * np.abs(times) ** alpha


def _direct_stat(S_list, alpha, a_values, sides):
    """exp(sup) over [0,S] (side 'one') or [-S,S] (side 'two'); columns ordered
    (level, a, side, S)."""
    def fn(w, times, centre, levels, u):
        cols = []
        for stride, step in levels:
            for a in a_values:
                y = _SQRT2 * w - _drift_term(times, alpha, a)
                for side in sides:
                    for S in S_list:
                        n = _steps_per(S, step)
                        lo = centre if side == "one" else centre - n * stride
                        sl = y[:, lo:centre + n * stride + 1:stride]
                        cols.append(np.exp(sl.max(axis=1)))
        return _finite(np.column_stack(cols), "window supremum")
    return fn


def _shift_stat(S_list, alpha):
    """(N+1) * max/sum over the shifted window [-tau, S - tau]; columns (level, S)."""
    def fn(w, times, centre, levels, u):
        y = _SQRT2 * w - np.abs(times) ** alpha
        cols = []
        for stride, step in levels:
            for S in S_list:
                n = _steps_per(S, step)
                k = np.minimum((u * (n + 1)).astype(np.int64), n)
                idx = centre + stride * (np.arange(n + 1)[None, :] - k[:, None])
                win = np.take_along_axis(y, idx, axis=1)
                top = win.max(axis=1, keepdims=True)
                ratio = 1.0 / np.exp(win - top).sum(axis=1)
                cols.append((n + 1) * ratio)
        return _finite(np.column_stack(cols), "shift-estimator ratio")
    return fn


def _mean_se(x):
    x = np.asarray(x, dtype=float)
    n = x.shape[0]
    se = x.std(axis=0, ddof=1) / math.sqrt(n) if n > 1 else np.full(x.shape[1:], math.inf)
    return x.mean(axis=0), se


def richardson_limit(fine, coarse, alpha):
    """Remove the leading grid bias, which scales like step**(alpha/2), from two
    estimates at steps d/2 and d."""
    if coarse is None:
        return None
    return fine + (fine - coarse) / (2.0 ** (alpha / 2) - 1.0)


def _check_common(alpha, S_list, delta, reps):
    _check_alpha(alpha)
    S_list = [float(s) for s in S_list]
    if any(s <= 0 for s in S_list) or any(b <= a for a, b in zip(S_list, S_list[1:])):
        raise DomainError(f"S_list must be positive and strictly increasing, got {S_list}")
    if not delta > 0:
        raise DomainError("delta must be positive")
    if delta > min(S_list) / 8:
        raise DomainError(f"delta = {delta} exceeds S/8 for S = {min(S_list)}")
    if reps < 2:
        raise DomainError("reps must be >= 2")
    return S_list


def estimate_pickands_window(alpha, S, delta, reps, seed, method="shift", richardson=True, workers=1):
    """H_alpha[0,S] = E sup_{[0,S]} exp(sqrt2 B_alpha(t) - t^alpha) on the grid."""
    est = _pickands_curves(alpha, [S], delta, reps, seed, method, richardson, workers)
    (fine_m, fine_se), coarse = est["levels"][0], est["levels"][1] if richardson else None
    value, mc_se = float(fine_m[0]), float(fine_se[0])
    stderr, coarse_value = mc_se, None
    if coarse is not None:
        coarse_value = float(coarse[0][0])
        stderr = math.hypot(mc_se, value - coarse_value)
    return ConstantEstimate(
        kind="pickands", alpha=alpha, S=float(S), delta=delta, reps=int(reps), value=value,
        stderr=stderr, per_S_curve=[(float(S), value, mc_se)], seed=int(seed), method=method,
        quantity="window", step_reported=est["step"], coarse_value=coarse_value,
        extrapolated_value=richardson_limit(value, coarse_value, alpha), mc_stderr=mc_se,
        S_list=[float(S)],
    )


def _pickands_curves(alpha, S_list, delta, reps, seed, method, richardson, workers):
    S_list = _check_common(alpha, S_list, delta, reps)
    if method == "shift":
        fn = _shift_stat(S_list, alpha)
    elif method == "direct":
        fn = _direct_stat(S_list, alpha, [0.0], ["one"])
    else:
        raise DomainError(f"unknown Pickands estimator {method!r}")
    (x,) = _simulate(alpha, S_list, delta, reps, seed, richardson, [fn], workers)
    k = len(S_list)
    blocks = [x[:, i * k:(i + 1) * k] for i in range(len(_levels(delta, richardson)))]
    return {
        "S_list": S_list,
        "raw": blocks,
        "levels": [_mean_se(b) for b in blocks],
        "step": _levels(delta, richardson)[0][1],
    }


def _slope_weights(S):
    S = np.asarray(S, dtype=float)
    d = S - S.mean()
    return d / np.sum(d * d)


def estimate_pickands(alpha, S_list, delta, reps, seed, method="shift", richardson=True,
                      fit_points=3, workers=1):
    """H_alpha as the slope of the fitted line H[0,S] ~ H_alpha * S + const."""
    if len(S_list) < 3:
        raise DomainError("estimate_pickands needs at least three horizons")
    est = _pickands_curves(alpha, S_list, delta, reps, seed, method, richardson, workers)
    S_list = est["S_list"]
    fit = slice(len(S_list) - min(fit_points, len(S_list)), None)
    w = _slope_weights(S_list[fit])

    def slope(raw):
        per_rep = raw[:, fit] @ w
        return float(per_rep.mean()), float(per_rep.std(ddof=1) / math.sqrt(len(per_rep)))

    value, mc_se = slope(est["raw"][0])
    means, ses = est["levels"][0]
    notes = []
    S_fit = np.asarray(S_list[fit])
    icpt = float(np.mean(means[fit]) - value * S_fit.mean())
    resid = means[fit] - (value * S_fit + icpt)
    pooled = float(np.sqrt(np.mean(ses[fit] ** 2)))
    if np.max(np.abs(resid)) > 3 * pooled:
        msg = (f"Pickands slope fit residual {np.max(np.abs(resid)):.3g} exceeds "
               f"3 pooled stderr ({3 * pooled:.3g}); H[0,S] may not be linear yet")
        warnings.warn(msg, AsymptoticWarning, stacklevel=2)
        notes.append(msg)

    stderr, coarse_value = mc_se, None
    if richardson:
        coarse_value, _ = slope(est["raw"][1])
        stderr = math.hypot(mc_se, value - coarse_value)
    return ConstantEstimate(
        kind="pickands", alpha=alpha, S=S_list[-1], delta=delta, reps=int(reps), value=value,
        stderr=stderr, per_S_curve=[(s, float(m), float(e)) for s, m, e in zip(S_list, means, ses)],
        seed=int(seed), method=method, quantity="limit", step_reported=est["step"],
        coarse_value=coarse_value, extrapolated_value=richardson_limit(value, coarse_value, alpha),
        mc_stderr=mc_se, S_list=S_list, notes=notes,
    )


def estimate_piterbarg_family(alpha, a_values, S_list, delta, reps, seed, richardson=True, workers=1):
    """P_alpha^a and P~_alpha^a for every ``a`` from one coupled ensemble.

    Returns ``{(a, two_sided): ConstantEstimate}``.
    """
    S_list = _check_common(alpha, S_list, delta, reps)
    a_values = [float(a) for a in a_values]
    if any(not a > 0 for a in a_values):
        raise DomainError("Piterbarg constants need a > 0")
    sides = ["one", "two"]
    levels = _levels(delta, richardson)
    (x,) = _simulate(alpha, S_list, delta, reps, seed, richardson,
                     [_direct_stat(S_list, alpha, a_values, sides)], workers)
    nS = len(S_list)
    shape = (x.shape[0], len(levels), len(a_values), len(sides), nS)
    x = x.reshape(shape)
    out = {}
    for ia, a in enumerate(a_values):
        for iside, side in enumerate(sides):
            means, ses = _mean_se(x[:, 0, ia, iside, :])
            value, mc_se = float(means[-1]), float(ses[-1])
            notes = []
            if nS >= 2:
                pooled = math.sqrt(0.5 * (ses[-1] ** 2 + ses[-2] ** 2))
                if abs(means[-1] - means[-2]) > 3 * pooled:
                    msg = (f"Piterbarg plateau not reached for alpha={alpha}, a={a}, {side}-sided: "
                           f"last two per-S values differ by {abs(means[-1] - means[-2]):.3g}")
                    warnings.warn(msg, AsymptoticWarning, stacklevel=2)
                    notes.append(msg)
            stderr, coarse_value = mc_se, None
            if richardson:
                coarse_value = float(x[:, 1, ia, iside, -1].mean())
                stderr = math.hypot(mc_se, value - coarse_value)
            out[(a, side == "two")] = ConstantEstimate(
                kind="piterbarg_two_sided" if side == "two" else "piterbarg_one_sided",
                alpha=alpha, a=a, S=S_list[-1], delta=delta, reps=int(reps), value=value,
                stderr=stderr, per_S_curve=[(s, float(m), float(e)) for s, m, e in zip(S_list, means, ses)],
                seed=int(seed), method="direct", quantity="limit", step_reported=levels[0][1],
                coarse_value=coarse_value, extrapolated_value=richardson_limit(value, coarse_value, alpha),
                mc_stderr=mc_se, S_list=S_list, notes=notes,
            )
    return out


def estimate_piterbarg(alpha, a, two_sided, S_list, delta, reps, seed, richardson=True, workers=1):
    fam = estimate_piterbarg_family(alpha, [a], S_list, delta, reps, seed, richardson, workers)
    return fam[(float(a), bool(two_sided))]


def piterbarg_pathwise(alpha, a_values, S, delta, reps, seed, richardson=False):
    """Per-path sup integrands, shape (reps, len(a_values), 2) with [..., 0] one-sided
    and [..., 1] two-sided. Used to check couplings path by path."""
    S_list = _check_common(alpha, [S], delta, reps)
    a_values = [float(a) for a in a_values]
    (x,) = _simulate(alpha, S_list, delta, reps, seed, richardson,
                     [_direct_stat(S_list, alpha, a_values, ["one", "two"])])
    nlev = len(_levels(delta, richardson))
    return x.reshape(x.shape[0], nlev, len(a_values), 2)[:, 0]


def pickands_window_pathwise(alpha, S_list, delta, reps, seed, richardson=True):
    """Per-path direct window sups, shape (reps, n_levels, len(S_list)); level 0 is finest."""
    est = _pickands_curves(alpha, S_list, delta, reps, seed, "direct", richardson, 1)
    return np.stack(est["raw"], axis=1)


def estimate(kind, alpha, a, protocol, workers=1):
    """Dispatch on ``kind`` with a ConstantsProtocol."""
    p = protocol
    if kind == "pickands":
        return estimate_pickands(alpha, p.S_list, p.delta, p.reps, p.seed, p.method, p.richardson,
                                 workers=workers)
    if kind in ("piterbarg_one_sided", "piterbarg_two_sided"):
        if a is None:
            raise DomainError(f"{kind} needs a penalty value a")
        return estimate_piterbarg(alpha, a, kind == "piterbarg_two_sided", p.S_list, p.delta, p.reps,
                                  p.seed, p.richardson, workers)
    raise DomainError(f"unknown constant kind {kind!r}; expected one of {KINDS}")
