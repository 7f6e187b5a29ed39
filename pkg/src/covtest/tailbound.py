"""Square-Gaussian tail bound for L_p norms.

For a square Gaussian process Y with ``C_p = int (E Y(t)**2)**(p/2) dmu(t)``::

    P{ int |Y|**p dmu > eps } <= g(eps)
    g(eps) = 2 sqrt(1 + sqrt(2) x) exp(-x / sqrt(2)),   x = (eps / C_p)**(1/p)

whenever ``eps >= z_p = (p/sqrt(2) + sqrt((p/2 + 1) p))**p * C_p``.

Everything below depends on ``eps`` only through ``x``, so the solver works
in ``x`` and maps back with ``eps = C_p * x**p``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .errors import DomainError

SQRT2 = math.sqrt(2.0)
MAX_BISECT = 200


@dataclass(frozen=True)
class TailBoundParams:
    p: float
    Cp: float

    def __post_init__(self):
        if not (math.isfinite(self.p) and self.p >= 1):
            raise DomainError(f"p must be >= 1, got {self.p!r}")
        if not (math.isfinite(self.Cp) and self.Cp > 0):
            raise DomainError(f"Cp must be positive and finite, got {self.Cp!r}")


class ThresholdBranch(enum.Enum):
    FROM_ROOT = "FromRoot"
    FROM_VALIDITY = "FromValidity"


def l0(s: float) -> float:
    """MGF bound ``(1 - |s|)**(-1/2) * exp(-|s|/2)`` for ``|s| < 1``."""
    s = abs(s)
    if not s < 1:
        raise DomainError(f"L0 needs |s| < 1, got {s!r}")
    return math.exp(-s / 2) / math.sqrt(1 - s)


def moment_bound(alpha: float, second_moment: float, s: float) -> float:
    """Upper bound on ``E|zeta|**alpha`` for square Gaussian zeta with ``E zeta**2 = second_moment``."""
    if not alpha > 0:
        raise DomainError(f"alpha must be positive, got {alpha!r}")
    if not second_moment > 0:
        raise DomainError(f"second_moment must be positive, got {second_moment!r}")
    if not 0 < s < 1:
        raise DomainError(f"s must lie in (0, 1), got {s!r}")
    return 2 * l0(s) * (math.sqrt(2 * second_moment) / s) ** alpha * alpha**alpha * math.exp(-alpha)


def _g_of_x(x: float) -> float:
    return 2 * math.sqrt(1 + SQRT2 * x) * math.exp(-x / SQRT2)


def _x_of(epsilon: float, params: TailBoundParams) -> float:
    return (epsilon / params.Cp) ** (1 / params.p)


def g_tail(epsilon: float, params: TailBoundParams) -> float:
    """The bound g(eps); not clamped to [0, 1].

    The value is a valid probability bound only for ``eps >= z_threshold``.
    """
    if not epsilon > 0:
        raise DomainError(f"epsilon must be positive, got {epsilon!r}")
    return _g_of_x(_x_of(epsilon, params))


def _validity_x(p: float) -> float:
    return p / SQRT2 + math.sqrt((p / 2 + 1) * p)


def z_threshold(params: TailBoundParams) -> float:
    return _validity_x(params.p) ** params.p * params.Cp


def _solve_x(delta: float) -> float:
    # g(x) = 2 sqrt(1 + sqrt2 x) exp(-x/sqrt2) has derivative
    # -x * exp(-x/sqrt2) / sqrt(1 + sqrt2 x) < 0 for x > 0 and g(0) = 2, so
    # g = delta has exactly one root on (0, inf) for every delta in (0, 1).
    lo, hi = 0.0, 1.0
    while _g_of_x(hi) >= delta:
        lo, hi = hi, 2 * hi
    for _ in range(MAX_BISECT):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if _g_of_x(mid) > delta:
            lo = mid
        else:
            hi = mid
    # g(hi) <= delta by construction; lo and hi are adjacent floats here
    return hi


def solve_epsilon_delta(delta: float, params: TailBoundParams) -> float:
    """eps_delta with ``g(eps_delta) = delta``."""
    if not 0 < delta < 1:
        raise DomainError(f"delta must lie in (0, 1), got {delta!r}")
    return params.Cp * _solve_x(delta) ** params.p


def s_delta(delta: float, params: TailBoundParams):
    """Decision threshold ``max(eps_delta, z_p)`` and the branch attaining it."""
    eps = solve_epsilon_delta(delta, params)
    z = z_threshold(params)
    if eps >= z:
        # mapping x back to eps can round g a few ulps above delta
        while g_tail(eps, params) > delta:
            eps = math.nextafter(eps, math.inf)
        return eps, ThresholdBranch.FROM_ROOT
    # g decreases, so g(z) <= g(eps) = delta
    return z, ThresholdBranch.FROM_VALIDITY
