"""Monte Carlo exceedance studies for sup of mBm over a grid, and comparison
with the asymptotic formulas.

All levels u in a study are evaluated on one shared ensemble (common random
numbers), so p_hat(u) is exactly nonincreasing in u. Paths are streamed
block by block and only their grid maxima are kept.
"""
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .asymptotics import ConstantsProvider, evaluate
from .errors import AsymptoticWarning, DomainError, NumericalError, PreconditionError
from .sampler import MAX_GRID, PRNG_ID, Grid, iter_mbm_blocks, mbm_factor

CSV_COLUMNS = ("u", "mu", "p_hat", "stderr", "p_asymptotic", "ratio", "regime")
REFINE_COLUMNS = ("u", "grid_n", "p_hat", "stderr")


def scenario_grid(scenario, grid_n):
    t1, t2 = scenario.interval
    return Grid(float(t1), float(t2), int(grid_n))


def default_grid_n(scenario, per_unit=2048):
    """2048 points per unit length, capped at the dense-factorization limit."""
    t1, t2 = scenario.interval
    return int(min(MAX_GRID, math.ceil(per_unit * (t2 - t1)) + 1))


def block_maxima(model, grid, reps, seed, strides=(1,), workers=1):
    """Per-path maxima over the subgrids ``grid.points[::s]``; shape (reps, len(strides))."""
    factor = mbm_factor(model, grid)
    out = np.empty((int(reps), len(strides)))
    for start, paths in iter_mbm_blocks(factor, reps, seed, workers):
        for j, s in enumerate(strides):
            out[start:start + len(paths), j] = paths[:, ::s].max(axis=1)
    if not np.all(np.isfinite(out)):
        raise NumericalError("non-finite path maxima")
    return out, factor.meta


def _p_and_se(exceed):
    p = float(np.mean(exceed))
    return p, math.sqrt(p * (1 - p) / len(exceed))


@dataclass
class ExceedanceStudy:
    scenario: object
    u_list: list
    grid_n: int
    reps: int
    seed: int
    rows: list = field(default_factory=list)
    trend_slope: float = None
    factorization_meta: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)
    prng: str = PRNG_ID

    def to_dict(self):
        return {
            "study": "exceedance",
            "scenario": self.scenario.to_dict(),
            "u_list": list(self.u_list),
            "grid_n": self.grid_n,
            "reps": self.reps,
            "seed": self.seed,
            "prng": self.prng,
            "factorization_meta": self.factorization_meta,
            "rows": self.rows,
            "trend_slope": self.trend_slope,
            "notes": self.notes,
        }


def _check_study(grid_n, reps, min_reps=1000):
    if grid_n > MAX_GRID:
        raise DomainError(f"grid_n = {grid_n} exceeds the cap {MAX_GRID}")
    if reps < min_reps:
        raise DomainError(f"reps = {reps} is below the minimum {min_reps}")


def estimate_exceedance(scenario, u_list, grid_n, reps, seed, workers=1):
    """Empirical P(max over grid > u) for every u on one shared ensemble."""
    _check_study(grid_n, reps)
    u_list = [float(u) for u in u_list]
    grid = scenario_grid(scenario, grid_n)
    m, meta = block_maxima(scenario.model, grid, reps, seed, workers=workers)
    rows = []
    for u in u_list:
        exceed = m[:, 0] > u
        p, se = _p_and_se(exceed)
        rows.append({"u": u, "p_hat": p, "stderr": se, "count": int(exceed.sum())})
    return ExceedanceStudy(scenario, u_list, int(grid_n), int(reps), int(seed), rows,
                           factorization_meta=meta)


def ratio_study(scenario, u_list, grid_n, reps, seed, constants=None, workers=1):
    """Join empirical exceedance probabilities with the asymptotic values."""
    constants = constants if constants is not None else ConstantsProvider()
    u_list = [float(u) for u in u_list]
    if any(b <= a for a, b in zip(u_list, u_list[1:])):
        raise DomainError("u_list must be strictly increasing")
    _check_study(grid_n, reps)
    results, notes = [], []
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", AsymptoticWarning)
        for u in u_list:
            try:
                results.append(evaluate(scenario, u, constants))
            except PreconditionError as exc:
                # a level below the asymptotic range is reported, not fatal
                results.append(None)
                notes.append(f"u = {u}: {exc}")
    for w in caught:
        warnings.warn(w.message, AsymptoticWarning, stacklevel=2)
    study = estimate_exceedance(scenario, u_list, grid_n, reps, seed, workers)
    study.notes.extend(sorted({str(w.message) for w in caught}) + notes)
    for row, res in zip(study.rows, results):
        if res is None:
            row.update(mu=None, regime=None, p_asymptotic=None, log_p_asymptotic=None,
                       ratio=None, log_ratio=None)
            continue
        row["mu"] = res.mu
        row["regime"] = res.regime
        row["p_asymptotic"] = res.value
        row["log_p_asymptotic"] = res.log_value
        if row["count"] > 0:
            row["ratio"] = row["p_hat"] / res.value
            row["log_ratio"] = math.log(row["p_hat"]) - res.log_value
        else:
            row["ratio"] = 0.0
            row["log_ratio"] = None
        if row["count"] < 10:
            msg = f"only {row['count']} exceedances at u = {row['u']}; ratio unreliable"
            warnings.warn(msg, AsymptoticWarning, stacklevel=2)
            study.notes.append(msg)
    usable = [(math.log(r["u"]), abs(r["log_ratio"])) for r in study.rows if r["log_ratio"] is not None]
    if len(usable) >= 2:
        x, y = np.array(usable).T
        study.trend_slope = float(np.polyfit(x, y, 1)[0])
    return study


@dataclass
class RefinementStudy:
    scenario: object
    u_list: list
    grid_n_list: list
    reps: int
    seed: int
    rate: float
    nested: bool
    rows: list = field(default_factory=list)
    extrapolated: list = field(default_factory=list)
    factorization_meta: dict = field(default_factory=dict)
    prng: str = PRNG_ID

    def to_dict(self):
        return {
            "study": "refinement",
            "scenario": self.scenario.to_dict(),
            "u_list": list(self.u_list),
            "grid_n_list": list(self.grid_n_list),
            "reps": self.reps,
            "seed": self.seed,
            "rate": self.rate,
            "nested": self.nested,
            "prng": self.prng,
            "factorization_meta": self.factorization_meta,
            "rows": self.rows,
            "extrapolated": self.extrapolated,
        }


def default_bias_rate(scenario, grid_n=1025):
    """Grid-max deficit exponent: step**H at the point where sigma peaks."""
    t = np.linspace(*scenario.interval, grid_n)
    crit = t[int(np.argmax(scenario.model.sigma(t)))]
    return float(scenario.hurst.value(crit))


def refinement_study(scenario, u_list, grid_n_list, reps, seed, rate=None, workers=1):
    """p_hat on successively finer grids plus a Richardson extrapolation from
    the two finest grids, assuming the deficit shrinks like step**rate.

    When every grid is nested in the finest one, a single ensemble is
    simulated and subsampled, so the levels are coupled path by path.
    """
    if np.isscalar(u_list):
        u_list = [u_list]
    u_list = [float(u) for u in u_list]
    grid_n_list = [int(n) for n in grid_n_list]
    if not grid_n_list or any(b <= a for a, b in zip(grid_n_list, grid_n_list[1:])):
        raise DomainError("grid_n_list must be non-empty and strictly increasing")
    _check_study(grid_n_list[-1], reps)
    rate = default_bias_rate(scenario) if rate is None else float(rate)
    fine = scenario_grid(scenario, grid_n_list[-1])
    strides = [fine.subgrid_stride(n) for n in grid_n_list]
    nested = all(s is not None for s in strides)
    if nested:
        m, meta = block_maxima(scenario.model, fine, reps, seed, strides, workers)
    else:
        cols = []
        for n in grid_n_list:
            mm, meta = block_maxima(scenario.model, scenario_grid(scenario, n), reps, seed,
                                    workers=workers)
            cols.append(mm[:, 0])
        m = np.column_stack(cols)

    study = RefinementStudy(scenario, u_list, grid_n_list, int(reps), int(seed), rate, nested,
                            factorization_meta=meta)
    steps = [(fine.t_end - fine.t_start) / (n - 1) for n in grid_n_list]
    for u in u_list:
        ps = []
        for j, n in enumerate(grid_n_list):
            p, se = _p_and_se(m[:, j] > u)
            ps.append((p, se))
            study.rows.append({"u": u, "grid_n": n, "p_hat": p, "stderr": se})
        if len(grid_n_list) == 1:
            p, se = ps[0]
        else:
            dc, df = steps[-2] ** rate, steps[-1] ** rate
            w = dc / (dc - df)
            per_path = w * (m[:, -1] > u) - (w - 1) * (m[:, -2] > u)
            if nested:
                p = float(per_path.mean())
                se = float(per_path.std(ddof=1) / math.sqrt(len(per_path)))
            else:
                p = w * ps[-1][0] - (w - 1) * ps[-2][0]
                se = math.hypot(w * ps[-1][1], (w - 1) * ps[-2][1])
        monotone = all(b[0] >= a[0] - 3 * math.hypot(a[1], b[1]) for a, b in zip(ps, ps[1:]))
        study.extrapolated.append({"u": u, "p_extrapolated": p, "stderr": se, "monotone_ok": monotone})
    return study
