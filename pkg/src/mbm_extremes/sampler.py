"""Exact Gaussian path simulation on grids.

mBm paths use a dense Cholesky factor of the (non-stationary) covariance
matrix. fBm paths use circulant embedding of the stationary increment
sequence. Replications are generated in fixed-size blocks, and block ``k``
draws its normals from ``Philox(SeedSequence(seed, spawn_key=(k,)))``, so
output never depends on how many worker threads are used.
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from .errors import DomainError, FactorizationError, NumericalError

log = logging.getLogger(__name__)

PRNG_ID = "numpy.Philox4x64-10/SeedSequence(seed,spawn_key=(block,stream))/ziggurat-normal"
BLOCK_REPS = 2048
JITTER_LADDER = (0.0, 1e-14, 1e-12, 1e-10)
MAX_GRID = 4096


@dataclass(frozen=True)
class Grid:
    t_start: float
    t_end: float
    n: int

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise DomainError(f"grid needs n >= 2 points, got {self.n}")
        if not self.t_start < self.t_end:
            raise DomainError(f"grid needs t_start < t_end, got [{self.t_start}, {self.t_end}]")

    @property
    def points(self):
        return np.linspace(self.t_start, self.t_end, self.n)

    @property
    def step(self):
        return (self.t_end - self.t_start) / (self.n - 1)

    def subgrid_stride(self, n_coarse):
        """Stride that picks an ``n_coarse``-point subgrid, or None if not nested."""
        if (self.n - 1) % (n_coarse - 1):
            return None
        return (self.n - 1) // (n_coarse - 1)


@dataclass
class PathEnsemble:
    grid: Grid
    paths: np.ndarray
    seed: int
    factorization_meta: dict = field(default_factory=dict)

    @property
    def reps(self):
        return self.paths.shape[0]


def block_rng(seed, block, stream=0):
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(block), int(stream)))
    return np.random.Generator(np.random.Philox(ss))


def block_sizes(reps, block_reps=BLOCK_REPS):
    if reps < 1:
        raise DomainError("reps must be >= 1")
    full, rest = divmod(int(reps), block_reps)
    return [block_reps] * full + ([rest] if rest else [])


def map_blocks(fn, sizes, workers=1):
    """Yield ``fn(block_index, size)`` in block order, optionally threaded."""
    if workers is None or workers <= 1:
        for k, sz in enumerate(sizes):
            yield fn(k, sz)
        return
    with ThreadPoolExecutor(max_workers=workers) as pool:
        # bounded look-ahead keeps memory flat for long runs
        pending = []
        for k, sz in enumerate(sizes):
            pending.append(pool.submit(fn, k, sz))
            if len(pending) > 2 * workers:
                yield pending.pop(0).result()
        for fut in pending:
            yield fut.result()


@dataclass(frozen=True)
class CholeskyFactor:
    """Lower factor restricted to the grid points with non-zero variance."""
    lower: np.ndarray
    active: np.ndarray
    n: int
    jitter_used: float
    min_eigen_proxy: float

    def transform(self, z):
        """Map standard normals ``z`` (reps x n_active) to paths (reps x n)."""
        out = np.zeros((z.shape[0], self.n))
        out[:, self.active] = z @ self.lower.T
        return out

    @property
    def meta(self):
        return {"jitter_used": self.jitter_used, "min_eigen_proxy": self.min_eigen_proxy}


def factorize(cov):
    """Cholesky with diagonal jitter escalation; zero-variance rows are pinned to 0."""
    cov = np.asarray(cov, dtype=float)
    n = cov.shape[0]
    diag = np.diag(cov)
    active = diag > 0
    k = cov[np.ix_(active, active)]
    m = k.shape[0]
    if m == 0:
        return CholeskyFactor(np.zeros((0, 0)), active, n, 0.0, 0.0)
    scale = np.trace(k) / m
    worst = None
    for rel in JITTER_LADDER:
        jitter = float(rel * scale)
        try:
            lower = linalg.cholesky(k + jitter * np.eye(m), lower=True, check_finite=True)
        except linalg.LinAlgError as exc:
            worst = str(exc)
            continue
        proxy = float(np.min(np.diag(lower)) ** 2)
        if rel > 0:
            log.debug("cholesky needed jitter %.3g (relative %.0e)", jitter, rel)
        return CholeskyFactor(lower, active, n, jitter, proxy)
    # locate the offending pivot for the message
    eig = linalg.eigvalsh(k)
    raise FactorizationError(
        f"covariance matrix is not numerically positive definite even with jitter "
        f"{JITTER_LADDER[-1]:.0e}*tr/n (LAPACK: {worst}; smallest eigenvalue {eig[0]:.3e})",
        worst_pivot=worst, jitter=JITTER_LADDER[-1] * scale,
    )


def _check_grid_in_domain(model, grid):
    t1, t2 = model.domain
    slack = 1e-12 * max(1.0, abs(t2))
    if grid.t_start < t1 - slack or grid.t_end > t2 + slack:
        raise DomainError(f"grid [{grid.t_start}, {grid.t_end}] leaves the model domain [{t1}, {t2}]")
    if grid.n > MAX_GRID:
        raise DomainError(f"grid has {grid.n} points; dense factorization is capped at {MAX_GRID}")


def mbm_factor(model, grid):
    _check_grid_in_domain(model, grid)
    return factorize(model.matrix(grid.points))


def iter_mbm_blocks(factor, reps, seed, workers=1):
    """Yield (start_row, paths_block) for ``reps`` replications."""
    sizes = block_sizes(reps)
    m = int(factor.active.sum())

    def run(k, sz):
        z = block_rng(seed, k).standard_normal((sz, m))
        return k * BLOCK_REPS, factor.transform(z)

    yield from map_blocks(run, sizes, workers)


def sample_mbm(model, grid, reps, seed, workers=1, factor=None):
    """i.i.d. mBm paths on ``grid``; rows are replications."""
    factor = factor or mbm_factor(model, grid)
    blocks = [b for _, b in iter_mbm_blocks(factor, reps, seed, workers)]
    paths = np.vstack(blocks)
    if not np.all(np.isfinite(paths)):
        raise NumericalError("non-finite values in sampled mBm paths")
    return PathEnsemble(grid, paths, int(seed), factor.meta)


def fgn_autocov(alpha, m):
    """Unit-step increment autocovariance rho(k) = (|k+1|^a - 2|k|^a + |k-1|^a)/2, k = 0..m."""
    k = np.arange(m + 1, dtype=float)
    return 0.5 * (np.abs(k + 1) ** alpha - 2 * k ** alpha + np.abs(k - 1) ** alpha)


@dataclass(frozen=True)
class FbmGenerator:
    alpha: float
    grid: Grid
    sqrt_eig: np.ndarray = None
    chol: np.ndarray = None

    @classmethod
    def build(cls, alpha, grid):
        if not 0 < alpha <= 2:
            raise DomainError(f"alpha must lie in (0, 2], got {alpha}")
        if grid.t_start != 0:
            raise DomainError("fBm grids must start at t = 0")
        m = grid.n - 1
        rho = fgn_autocov(alpha, m)
        circ = np.concatenate([rho, rho[-2:0:-1]])
        eig = np.fft.fft(circ).real
        if eig.min() < -1e-9 * eig.max():
            log.warning("circulant embedding is not nonnegative definite (min eig %.3e); "
                        "falling back to Cholesky on %d increments", eig.min(), m)
            lower = linalg.cholesky(linalg.toeplitz(rho[:m]), lower=True)
            return cls(alpha, grid, chol=lower)
        eig = np.clip(eig, 0.0, None)
        return cls(alpha, grid, sqrt_eig=np.sqrt(eig / len(eig)))

    @property
    def block_reps(self):
        # keeps one complex work array around 64 MB
        m2 = 2 * (self.grid.n - 1)
        return int(max(2, min(BLOCK_REPS, (1 << 22) // m2)) // 2 * 2)

    def increments(self, rng, size):
        m = self.grid.n - 1
        if self.chol is not None:
            z = rng.standard_normal((size, m))
            return z @ self.chol.T
        half = (size + 1) // 2
        z = rng.standard_normal((half, 2, len(self.sqrt_eig)))
        w = np.fft.fft(self.sqrt_eig * (z[:, 0] + 1j * z[:, 1]), axis=1)[:, :m]
        # real and imaginary parts are independent draws with the same law
        out = np.empty((2 * half, m))
        out[0::2] = w.real
        out[1::2] = w.imag
        return out[:size]

    def paths(self, rng, size):
        inc = self.increments(rng, size) * self.grid.step ** (self.alpha / 2)
        out = np.zeros((size, self.grid.n))
        np.cumsum(inc, axis=1, out=out[:, 1:])
        return out

    def iter_blocks(self, reps, seed, workers=1):
        sizes = block_sizes(reps, self.block_reps)
        br = self.block_reps

        def run(k, sz):
            return k * br, self.paths(block_rng(seed, k), sz)

        yield from map_blocks(run, sizes, workers)


def sample_fbm(alpha, grid, reps, seed, workers=1):
    """fBm with Var X(t) = t**alpha on a uniform grid from 0."""
    gen = FbmGenerator.build(alpha, grid)
    paths = np.vstack([b for _, b in gen.iter_blocks(reps, seed, workers)])
    meta = {"method": "cholesky" if gen.chol is not None else "circulant", "jitter_used": 0.0,
            "min_eigen_proxy": float(gen.sqrt_eig.min() ** 2) if gen.sqrt_eig is not None else math.nan}
    return PathEnsemble(grid, paths, int(seed), meta)


def sup_over_path(ensemble):
    paths = ensemble.paths if isinstance(ensemble, PathEnsemble) else np.asarray(ensemble)
    if paths.size == 0:
        raise DomainError("empty ensemble")
    return np.max(np.atleast_2d(paths), axis=1)
