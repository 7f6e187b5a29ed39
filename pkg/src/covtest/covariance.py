"""Covariance models, the correlogram variance psi(T, tau) and the constant C_p.

psi(T, tau) is the mean square deviation of the correlogram at lag ``tau``
for a centred stationary Gaussian process observed on ``[0, T + A]``::

    psi(T, tau) = 2/T**2 * int_0^T (T - u) (rho(u)**2 + rho(u + tau) rho(u - tau)) du

and ``C_p = int_0^A psi(T, tau) ** (p/2) dtau``.
"""
from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import kernels
from .errors import DegenerateCpError, EvaluationError, InvalidModelError, InvalidWindowError

CP_FLOOR = 1e-300
GRID_RTOL = 1e-9


class ModelKind(enum.Enum):
    EXPONENTIAL = "exp"
    SQUARED_EXPONENTIAL = "sqexp"
    TABULATED = "table"


_KIND_CODE = {
    ModelKind.EXPONENTIAL: kernels.KIND_EXP,
    ModelKind.SQUARED_EXPONENTIAL: kernels.KIND_SQEXP,
    ModelKind.TABULATED: kernels.KIND_TABLE,
}


@dataclass(frozen=True)
class CovarianceModel:
    """An even covariance function rho(tau).

    Exponential evaluates ``B*exp(-a|tau|)``, SquaredExponential evaluates
    ``B*exp(-a*tau**2)``.  Tabulated interpolates linearly between knots
    ``(lag, value)``, mirrors for negative lags and is zero past the last
    knot.  Positive definiteness of a table is not checked.
    """

    kind: ModelKind
    B: float = 1.0
    a: float = 1.0
    table: Optional[tuple] = None

    def __post_init__(self):
        if self.kind is ModelKind.TABULATED:
            if not self.table:
                raise InvalidModelError("tabulated model needs a non-empty table")
            lags = np.array([float(t) for t, _ in self.table])
            vals = np.array([float(v) for _, v in self.table])
            if not (np.all(np.isfinite(lags)) and np.all(np.isfinite(vals))):
                raise InvalidModelError("table contains non-finite entries")
            if lags[0] != 0.0:
                raise InvalidModelError("table lags must start at 0")
            if np.any(np.diff(lags) <= 0):
                raise InvalidModelError("table lags must be strictly increasing")
            if vals[0] < 0 or np.any(np.abs(vals) > vals[0]):
                raise InvalidModelError("table must satisfy |rho(tau)| <= rho(0)")
            object.__setattr__(self, "table", tuple(zip(lags.tolist(), vals.tolist())))
        else:
            for name in ("B", "a"):
                v = getattr(self, name)
                if not (math.isfinite(v) and v > 0):
                    raise InvalidModelError(f"{name} must be positive and finite, got {v!r}")
            object.__setattr__(self, "B", float(self.B))
            object.__setattr__(self, "a", float(self.a))

    @classmethod
    def exponential(cls, B=1.0, a=1.0):
        return cls(ModelKind.EXPONENTIAL, B, a)

    @classmethod
    def squared_exponential(cls, B=1.0, a=1.0):
        return cls(ModelKind.SQUARED_EXPONENTIAL, B, a)

    @classmethod
    def tabulated(cls, lags: Sequence[float], values: Sequence[float]):
        if len(lags) != len(values):
            raise InvalidModelError("lags and values differ in length")
        return cls(ModelKind.TABULATED, table=tuple(zip(lags, values)))

    @classmethod
    def constant(cls, B: float, support: float):
        """rho == B on ``[0, support]`` (degenerate, for checks)."""
        return cls.tabulated([0.0, support], [B, B])

    @property
    def rho0(self) -> float:
        return self.B if self.table is None else self.table[0][1]

    def kernel_args(self):
        if self.table is None:
            knots = vals = np.zeros(1)
        else:
            knots = np.array([t for t, _ in self.table])
            vals = np.array([v for _, v in self.table])
        return _KIND_CODE[self.kind], self.B, self.a, knots, vals

    def __call__(self, tau):
        return eval_rho(self, tau)

    def describe(self) -> str:
        if self.table is None:
            return f"{self.kind.value}(B={self.B!r},a={self.a!r})"
        return f"table(n={len(self.table)},rho0={self.rho0!r},last={self.table[-1][0]!r})"


def load_table_csv(path) -> CovarianceModel:
    """Read a ``lag,value`` CSV into a tabulated model."""
    lags, vals = [], []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["lag", "value"]:
            raise InvalidModelError(f"{path}: expected header 'lag,value'")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 2:
                raise InvalidModelError(f"{path}:{lineno}: expected two columns")
            try:
                lags.append(float(row[0]))
                vals.append(float(row[1]))
            except ValueError as exc:
                raise InvalidModelError(f"{path}:{lineno}: {exc}") from None
    return CovarianceModel.tabulated(lags, vals)


def eval_rho(model: CovarianceModel, tau):
    """rho(|tau|); scalar in, float out, array in, array out."""
    arr = np.atleast_1d(np.asarray(tau, dtype=float))
    out = kernels.rho_values(*model.kernel_args(), arr.ravel()).reshape(arr.shape)
    if np.ndim(tau) == 0:
        return float(out[0])
    return out


@dataclass(frozen=True)
class ObservationWindow:
    """Observation span ``T``, maximal lag ``A`` and grid step ``dt``."""

    T: float
    A: float
    dt: float

    def __post_init__(self):
        for name in ("T", "A", "dt"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise InvalidWindowError(f"{name} must be positive and finite, got {v!r}")
        if self.dt > min(self.T, self.A) * (1 + GRID_RTOL):
            raise InvalidWindowError("dt must not exceed min(T, A)")
        for name in ("T", "A"):
            r = getattr(self, name) / self.dt
            if abs(r - round(r)) > GRID_RTOL * max(1.0, r):
                raise InvalidWindowError(f"{name}/dt = {r!r} is not an integer")

    @property
    def n_T(self) -> int:
        return int(round(self.T / self.dt))

    @property
    def n_A(self) -> int:
        return int(round(self.A / self.dt))

    @property
    def n_points(self) -> int:
        """Grid points on ``[0, T + A]``."""
        return self.n_T + self.n_A + 1


def default_dt(model: CovarianceModel, T: float, A: float, max_step=0.05, max_div=100_000):
    """Largest grid step with ``a*dt <= max_step`` that divides both T and A.

    Returns None when no such step is found (tabulated models always).
    """
    if model.table is not None:
        return None
    k = max(1, math.ceil(model.a * A / max_step - 1e-12))
    while k <= max_div:
        dt = A / k
        r = T / dt
        if abs(r - round(r)) <= GRID_RTOL * max(1.0, r):
            return dt
        k += 1
    return None


@dataclass(frozen=True)
class QuadratureSpec:
    """Resolution of the nested quadrature.

    ``n_inner`` Simpson subintervals per smooth piece of the u-integral,
    ``n_outer`` Simpson subintervals on ``[0, A]``; both even.  ``analytic``
    selects the exact antiderivatives of psi for the two analytic kinds.
    """

    n_inner: int = 2000
    n_outer: int = 400
    analytic: bool = True

    def __post_init__(self):
        for name in ("n_inner", "n_outer"):
            n = getattr(self, name)
            if n < 2 or n % 2:
                raise ValueError(f"{name} must be an even integer >= 2, got {n!r}")

    def refined(self) -> "QuadratureSpec":
        return QuadratureSpec(2 * self.n_inner, 2 * self.n_outer, self.analytic)


DEFAULT_QUAD = QuadratureSpec()


@dataclass(frozen=True)
class PsiCurve:
    lags: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)


def _phi(x):
    """``exp(-x) - 1 + x`` without cancellation for small x."""
    x = np.asarray(x, dtype=float)
    small = x < 1e-2
    xs = np.where(small, x, 0.0)
    series = xs**2 / 2 * (1 - xs / 3 * (1 - xs / 4 * (1 - xs / 5)))
    return np.where(small, series, np.expm1(-x) + x)


def _psi_exponential(B, a, T, tau):
    s = np.minimum(tau, T)
    inner = (
        _phi(2 * a * T) / (4 * a * a)
        + np.exp(-2 * a * tau) * (T * s - s * s / 2)
        + np.exp(-2 * a * s) * _phi(2 * a * (T - s)) / (4 * a * a)
    )
    return 2 * B * B * inner / (T * T)


def _psi_squared_exponential(B, a, T, tau):
    from scipy.special import erf

    k = T * math.sqrt(math.pi / (8 * a)) * erf(math.sqrt(2 * a) * T) + math.expm1(-2 * a * T * T) / (4 * a)
    return 2 * B * B * (1 + np.exp(-2 * a * tau * tau)) * k / (T * T)


def _psi_raw(model, T, taus, quad):
    if quad.analytic and model.kind is ModelKind.EXPONENTIAL:
        return _psi_exponential(model.B, model.a, T, taus)
    if quad.analytic and model.kind is ModelKind.SQUARED_EXPONENTIAL:
        return _psi_squared_exponential(model.B, model.a, T, taus)
    return kernels.psi_simpson(*model.kernel_args(), float(T), taus, quad.n_inner)


def psi_values(model: CovarianceModel, T: float, taus, quad: QuadratureSpec = DEFAULT_QUAD):
    """psi(T, tau) on an array of lags, validated and clamped at 0."""
    if not (T > 0 and math.isfinite(T)):
        raise EvaluationError(f"T must be positive, got {T!r}")
    taus = np.atleast_1d(np.asarray(taus, dtype=float))
    if np.any(taus < 0):
        raise EvaluationError("psi is defined for tau >= 0")
    out = np.asarray(_psi_raw(model, float(T), taus, quad), dtype=float)
    if not np.all(np.isfinite(out)):
        raise EvaluationError("non-finite psi value")
    tol = 1e-10 * 4 * model.rho0**2 + 1e-300
    if np.any(out < -tol):
        raise EvaluationError(f"psi negative beyond quadrature tolerance: {out.min()!r}")
    return np.maximum(out, 0.0)


def psi(model: CovarianceModel, T: float, tau: float, quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    return float(psi_values(model, T, [tau], quad)[0])


def psi_curve(model, T, A, n, quad=DEFAULT_QUAD) -> PsiCurve:
    lags = np.linspace(0.0, A, n + 1)
    return PsiCurve(lags, psi_values(model, T, lags, quad))


def _simpson(f, a, b, n):
    x = np.linspace(a, b, n + 1)
    return float(kernels.simpson_weights(n, (b - a) / n) @ f(x))


def compute_cp(
    model: CovarianceModel,
    window: ObservationWindow,
    p: float,
    quad: QuadratureSpec = DEFAULT_QUAD,
) -> float:
    """C_p = int_0^A psi(T, tau)**(p/2) dtau by composite Simpson.

    Only ``window.T`` and ``window.A`` matter; see :func:`cp_integral`.
    """
    return cp_integral(model, window.T, window.A, p, quad)


def cp_integral(model, T, A, p, quad=DEFAULT_QUAD) -> float:
    if not p >= 1:
        raise ValueError(f"p must be >= 1, got {p!r}")
    # psi has a kink at tau = T, reachable only when A > T
    edges = [0.0, A] if A <= T else [0.0, T, A]
    cp = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        cp += _simpson(lambda t: psi_values(model, T, t, quad) ** (p / 2), lo, hi, quad.n_outer)
    if not math.isfinite(cp):
        raise EvaluationError("C_p is not finite")
    if cp <= CP_FLOOR:
        raise DegenerateCpError(
            f"C_p = {cp!r} is degenerate (<= {CP_FLOOR:g}); the null covariance vanishes on the tested lags"
        )
    return cp


def _bound_common(B, a, T, A, p):
    for name, v in (("B", B), ("a", a), ("T", T), ("A", A)):
        if not (math.isfinite(v) and v > 0):
            raise ValueError(f"{name} must be positive and finite, got {v!r}")
    if not p >= 1:
        raise ValueError(f"p must be >= 1, got {p!r}")
    # rho**2 carries B**2, so the prefactor is (2 B**2)**(p/2)
    return (2 * B * B) ** (p / 2) * T ** (-p / 2)


def cp_bound_exponential(B, a, T, A, p, n=2000) -> float:
    """Upper bound on C_p for ``rho = B exp(-a|tau|)``."""
    pref = _bound_common(B, a, T, A, p)
    tail = math.exp(-2 * a * T) / (2 * a * a)
    integral = _simpson(lambda t: ((t + 1 / (2 * a)) * np.exp(-2 * a * t) + 1 / (2 * a) + tail) ** (p / 2), 0.0, A, n)
    return pref * integral


def cp_bound_gaussian(B, a, T, A, p, n=2000) -> float:
    """Upper bound on C_p for ``rho = B exp(-a tau**2)``."""
    pref = _bound_common(B, a, T, A, p)
    c = math.sqrt(math.pi) / (2 * math.sqrt(2 * a))
    integral = _simpson(lambda t: (c + c * np.exp(-2 * a * t * t)) ** (p / 2), 0.0, A, n)
    return pref * integral


def cp_decay_check(model, A, p, T_list, quad=DEFAULT_QUAD):
    """[(T, C_p)] for each observation span in an increasing ``T_list``."""
    T_list = [float(t) for t in T_list]
    if any(t <= 0 for t in T_list) or any(b <= a for a, b in zip(T_list, T_list[1:])):
        raise ValueError("T_list must be positive and strictly increasing")
    return [(T, cp_integral(model, T, A, p, quad)) for T in T_list]
