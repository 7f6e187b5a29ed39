"""Sample paths, the discretised correlogram and the L_p deviation statistic.

Paths are drawn exactly on the grid ``t_i = i*dt`` by circulant embedding
(Cholesky for small grids on request).  Replication ``r`` of a campaign with
master seed ``s`` draws from ``numpy.random.SeedSequence(s, spawn_key=(r,))``,
the same stream ``SeedSequence(s).spawn(n)[r]`` hands out, so results do not
depend on the order in which replications run.
"""
from __future__ import annotations

import csv
import functools
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.linalg import toeplitz

from . import kernels
from .covariance import GRID_RTOL, CovarianceModel, ObservationWindow, eval_rho
from .errors import CoverageError, EmbeddingError, SimulationError

MAX_GRID = 2**24
CHOLESKY_MAX = 4096
NEG_EIG_RTOL = 1e-9
CHOLESKY_JITTER = 1e-12


@dataclass(frozen=True)
class SamplePath:
    dt: float
    values: np.ndarray = field(repr=False)
    seed: Optional[int] = None

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 1 or v.size < 2:
            raise SimulationError("a path needs at least two grid values")
        if not np.all(np.isfinite(v)):
            raise SimulationError("path contains non-finite values")
        object.__setattr__(self, "values", v)

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.values.size) * self.dt


@dataclass(frozen=True)
class Correlogram:
    dt: float
    values: np.ndarray = field(repr=False)

    @property
    def lags(self) -> np.ndarray:
        return np.arange(self.values.size) * self.dt


def replication_seed(master_seed: int, r: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(master_seed, spawn_key=(r,))


def _next_pow2(n):
    return 1 << max(0, (n - 1).bit_length())


class CirculantSampler:
    """Exact stationary Gaussian sampler on ``n`` equally spaced points.

    The first row ``rho(k*dt)``, ``k = 0..m/2``, is mirrored into a circulant
    of size ``m`` (a power of two, at least ``pad * 2 * (n - 1)``) whose
    eigenvalues come from one real FFT.
    """

    def __init__(self, model: CovarianceModel, n: int, dt: float, pad: int = 1):
        if n < 2:
            raise SimulationError("need at least two grid points")
        if n > MAX_GRID:
            raise SimulationError(f"grid of {n} points exceeds the {MAX_GRID} limit")
        m = _next_pow2(max(2, pad * 2 * (n - 1)))
        half = eval_rho(model, np.arange(m // 2 + 1) * dt)
        row = np.concatenate([half, half[-2:0:-1]])
        lam = np.fft.rfft(row).real
        lmax = lam.max()
        if lmax <= 0:
            raise EmbeddingError("covariance has no positive spectral mass on this grid")
        if lam.min() < -NEG_EIG_RTOL * lmax:
            raise EmbeddingError(
                f"circulant embedding of size {m} is not nonnegative definite "
                f"(min eigenvalue {lam.min():.3g}, max {lmax:.3g}); "
                "enlarge the embedding (pad) or use method='cholesky'"
            )
        self.n, self.m, self.dt = n, m, dt
        self._scale = np.sqrt(np.clip(lam, 0.0, None) / m)

    def draw(self, rng: np.random.Generator, size: Optional[int] = None) -> np.ndarray:
        """One path of length n, or ``size`` paths stacked row-wise."""
        shape = (1 if size is None else size, self.m // 2 + 1)
        # real part of the DFT of sqrt(lam/m) * (Z1 + i Z2) over the full
        # circulant; built from the half spectrum by Hermitian symmetry
        z = rng.standard_normal((shape[0], self.m)) + 1j * rng.standard_normal((shape[0], self.m))
        spec = np.concatenate([self._scale, self._scale[-2:0:-1]])
        x = np.fft.fft(spec * z, axis=1).real[:, : self.n]
        return x[0] if size is None else x


class CholeskySampler:
    def __init__(self, model: CovarianceModel, n: int, dt: float):
        if n > CHOLESKY_MAX:
            raise SimulationError(f"Cholesky fallback is limited to {CHOLESKY_MAX} points")
        c = toeplitz(eval_rho(model, np.arange(n) * dt))
        c[np.diag_indices(n)] += CHOLESKY_JITTER * model.rho0
        try:
            self._L = np.linalg.cholesky(c)
        except np.linalg.LinAlgError:
            raise SimulationError("covariance matrix is not positive definite; Cholesky failed") from None
        self.n, self.dt = n, dt

    def draw(self, rng: np.random.Generator, size: Optional[int] = None) -> np.ndarray:
        z = rng.standard_normal((1 if size is None else size, self.n))
        x = z @ self._L.T
        return x[0] if size is None else x


@functools.lru_cache(maxsize=16)
def make_sampler(model: CovarianceModel, n: int, dt: float, method: str = "circulant", pad: int = 1):
    if method == "circulant":
        return CirculantSampler(model, n, dt, pad)
    if method == "cholesky":
        return CholeskySampler(model, n, dt)
    raise ValueError(f"unknown simulation method {method!r}")


def _rng(seed):
    if isinstance(seed, np.random.SeedSequence):
        return np.random.default_rng(seed)
    return np.random.default_rng(int(seed))


def simulate_path(
    model: CovarianceModel,
    window: ObservationWindow,
    seed,
    method: str = "circulant",
    pad: int = 1,
) -> SamplePath:
    """Centred stationary Gaussian path with covariance ``model`` on ``[0, T + A]``.

    ``seed`` is an integer or a ``SeedSequence``; equal seeds give equal paths.
    """
    sampler = make_sampler(model, window.n_points, window.dt, method, pad)
    x = sampler.draw(_rng(seed))
    return SamplePath(window.dt, x, seed if isinstance(seed, (int, np.integer)) else None)


def _check_dt(dt, window):
    if abs(dt - window.dt) > GRID_RTOL * window.dt:
        raise CoverageError(f"grid step {dt!r} does not match the window step {window.dt!r}")


def correlogram_matrix(X: np.ndarray, window: ObservationWindow) -> np.ndarray:
    """Correlograms of the rows of ``X`` on lags ``0, dt, ..., A``."""
    X = np.ascontiguousarray(np.atleast_2d(X), dtype=float)
    need = window.n_points
    if X.shape[1] < need:
        raise CoverageError(f"path has {X.shape[1]} points, {need} are needed to cover [0, T+A]")
    return kernels.correlogram_batch(X, window.n_T, window.n_A + 1, window.dt, window.T)


def correlogram(path: SamplePath, window: ObservationWindow) -> Correlogram:
    """Trapezoid-rule correlogram ``(1/T) int_0^T X(t + tau) X(t) dt``."""
    _check_dt(path.dt, window)
    return Correlogram(window.dt, correlogram_matrix(path.values, window)[0])


def deviation_statistic(rho_hat: np.ndarray, rho: np.ndarray, dt: float, p: float) -> np.ndarray:
    """Row-wise trapezoid ``int |rho_hat - rho|**p`` on a lag grid of step dt."""
    dev = np.ascontiguousarray(np.atleast_2d(rho_hat) - rho, dtype=float)
    return kernels.lp_trapezoid(dev, float(dt), float(p))


def test_statistic(corr: Correlogram, model: CovarianceModel, A: float, p: float) -> float:
    """``int_0^A |rho_hat(tau) - rho(tau)|**p dtau`` by the trapezoid rule."""
    if not p >= 1:
        raise ValueError(f"p must be >= 1, got {p!r}")
    r = A / corr.dt
    M = int(round(r))
    if M < 1 or abs(r - M) > GRID_RTOL * max(1.0, r):
        raise CoverageError(f"A = {A!r} is not a positive multiple of the lag step {corr.dt!r}")
    if corr.values.size < M + 1:
        raise CoverageError(f"correlogram covers {corr.values.size} lags, {M + 1} are needed")
    lags = np.arange(M + 1) * corr.dt
    return float(deviation_statistic(corr.values[: M + 1], eval_rho(model, lags), corr.dt, p)[0])


test_statistic.__test__ = False  # not a pytest test


# ---------------------------------------------------------------------------
# CSV round trips


def _fmt(x) -> str:
    return f"{x:.17g}"


def write_path_csv(path: SamplePath, dest) -> None:
    with open(dest, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", "x"])
        for t, x in zip(path.times, path.values):
            w.writerow([_fmt(t), _fmt(x)])


def _read_two_columns(src, header):
    rows = []
    with open(src, newline="") as fh:
        reader = csv.reader(fh)
        got = next(reader, None)
        if got is None or [h.strip() for h in got] != header:
            raise CoverageError(f"{src}: expected header {','.join(header)!r}")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 2:
                raise CoverageError(f"{src}:{lineno}: expected two columns")
            try:
                rows.append((float(row[0]), float(row[1])))
            except ValueError as exc:
                raise CoverageError(f"{src}:{lineno}: {exc}") from None
    if len(rows) < 2:
        raise CoverageError(f"{src}: need at least two rows")
    arr = np.array(rows)
    if not np.all(np.isfinite(arr)):
        raise CoverageError(f"{src}: non-finite entries")
    return arr[:, 0], arr[:, 1]


def _grid_step(t, src):
    dt = t[1] - t[0]
    if t[0] != 0.0 or dt <= 0 or np.max(np.abs(t - np.arange(t.size) * dt)) > 1e-6 * dt:
        raise CoverageError(f"{src}: first column is not a uniform grid starting at 0")
    return float(dt)


def read_path_csv(src) -> SamplePath:
    t, x = _read_two_columns(src, ["t", "x"])
    return SamplePath(_grid_step(t, src), x)


def write_correlogram_csv(corr: Correlogram, dest) -> None:
    with open(dest, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["lag", "rho_hat"])
        for lag, v in zip(corr.lags, corr.values):
            w.writerow([_fmt(lag), _fmt(v)])


def read_correlogram_csv(src) -> Correlogram:
    lag, v = _read_two_columns(src, ["lag", "rho_hat"])
    return Correlogram(_grid_step(lag, src), v)
