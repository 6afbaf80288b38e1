"""Quadrature engine and the scalar special functions of the profile problem.

Most quantities reduce to the sine moments

    I_k(d) = int_0^{arcsin d} sin^k t dt,

which are evaluated by adaptive quadrature for arbitrary real k >= 0.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

from scipy import integrate as _sint

from .errors import DomainError, NonConvergent

# derivative formulas blow up at d = 1
DERIVATIVE_D_MAX = 1.0 - 1e-6


@dataclass(frozen=True)
class QuadratureConfig:
    abs_tol: float = 1e-12
    rel_tol: float = 1e-10
    max_subdivisions: int = 60

    def __post_init__(self) -> None:
        if not self.abs_tol > 0 or not self.rel_tol > 0:
            raise DomainError("quadrature tolerances must be positive")
        if int(self.max_subdivisions) != self.max_subdivisions or self.max_subdivisions < 1:
            raise DomainError("max_subdivisions must be a positive integer")


DEFAULT_QUAD = QuadratureConfig()


def check_alpha(alpha: float) -> float:
    """Validate the Grushin exponent and return it as a float."""
    a = float(alpha)
    if not math.isfinite(a) or a < 0:
        raise DomainError(f"alpha must be a finite nonnegative real, got {alpha!r}")
    return a


def homogeneous_dimension(alpha: float) -> float:
    return check_alpha(alpha) + 2.0


def integrate(
    f: Callable[[float], float],
    a: float,
    b: float,
    cfg: QuadratureConfig = DEFAULT_QUAD,
    points: tuple[float, ...] | None = None,
) -> float:
    """Adaptive integral of ``f`` over [a, b].

    Integrable algebraic endpoint singularities such as (b - x)^(-1/2) are
    handled by the extrapolating QUADPACK driver.
    """
    if not (a <= b):
        raise DomainError(f"integration bounds out of order: a={a}, b={b}")
    if a == b:
        return 0.0
    kw = {}
    if points:
        inner = tuple(p for p in points if a < p < b)
        if inner:
            kw["points"] = inner
    out = _sint.quad(
        f, a, b,
        epsabs=cfg.abs_tol, epsrel=cfg.rel_tol, limit=cfg.max_subdivisions,
        full_output=1, **kw,
    )
    val, err = out[0], out[1]
    if len(out) > 3:
        ier_msg = out[3]
        # QUADPACK flags roundoff even when the estimate is fine; only a
        # genuinely unmet tolerance is an error.
        if not math.isfinite(val) or err > max(cfg.abs_tol, cfg.rel_tol * abs(val)) * 10:
            raise NonConvergent(f"quadrature on [{a}, {b}] failed: {ier_msg} (err={err:.3g})")
    return float(val)


def _check_d(d: float, allow_one: bool = True) -> float:
    d = float(d)
    upper_ok = d <= 1.0 if allow_one else d < 1.0
    if not (d > 0.0 and upper_ok):
        raise DomainError(f"d must lie in (0, 1{']' if allow_one else ')'}, got {d}")
    return d


def sine_moment(k: float, d: float, cfg: QuadratureConfig = DEFAULT_QUAD) -> float:
    """I_k(d) = int_0^{arcsin d} sin^k for d in [0, 1]."""
    if not (0.0 <= d <= 1.0):
        raise DomainError(f"d must lie in [0, 1], got {d}")
    if k == 0:
        return math.asin(d)
    return integrate(lambda t: math.sin(t) ** k, 0.0, math.asin(d), cfg)


def phi_alpha(alpha: float, r: float, cfg: QuadratureConfig = DEFAULT_QUAD) -> float:
    """Isoperimetric profile int_{arcsin r}^{pi/2} sin^{alpha+1}."""
    a = check_alpha(alpha)
    r = float(r)
    if not (0.0 <= r <= 1.0):
        raise DomainError(f"r must lie in [0, 1], got {r}")
    if r == 1.0:
        return 0.0
    # int_0^{arccos r} cos^{a+1}: avoids cancelling pi/2 - arcsin(r) near r = 1
    top = 2.0 * math.asin(math.sqrt(0.5 * (1.0 - r)))
    return integrate(lambda t: math.cos(t) ** (a + 1.0), 0.0, top, cfg)


def phi_alpha_prime(alpha: float, r: float) -> float:
    a = check_alpha(alpha)
    r = float(r)
    if not (0.0 <= r < 1.0):
        raise DomainError(f"r must lie in [0, 1), got {r}")
    return -(r ** (a + 1.0)) / math.sqrt(1.0 - r * r)


def iso_constant(alpha: float, cfg: QuadratureConfig = DEFAULT_QUAD) -> float:
    a = check_alpha(alpha)
    full = 2.0 * integrate(lambda t: math.sin(t) ** a, 0.0, math.pi, cfg)
    return (a + 1.0) / (a + 2.0) * full ** (-1.0 / (a + 1.0))


def iso_area(alpha: float, cfg: QuadratureConfig = DEFAULT_QUAD) -> float:
    """Area of the isoperimetric set, 4 int_0^1 phi_alpha.

    Swapping the order of integration gives 4 int_0^{pi/2} sin^{alpha+2}.
    """
    a = check_alpha(alpha)
    return 4.0 * integrate(lambda t: math.sin(t) ** (a + 2.0), 0.0, 0.5 * math.pi, cfg)


def iso_perimeter(alpha: float, cfg: QuadratureConfig = DEFAULT_QUAD) -> float:
    a = check_alpha(alpha)
    return 4.0 * integrate(lambda x: x ** a / math.sqrt(1.0 - x * x), 0.0, 1.0, cfg)


def g_alpha(alpha: float, d: float, cfg: QuadratureConfig = DEFAULT_QUAD) -> float:
    a, d = check_alpha(alpha), _check_d(d)
    return sine_moment(a, d, cfg) / d ** (a + 1.0)


def sigma_alpha(alpha: float, d: float, cfg: QuadratureConfig = DEFAULT_QUAD) -> float:
    a, d = check_alpha(alpha), _check_d(d)
    return sine_moment(a + 1.0, d, cfg) / d ** (a + 1.0)


def G_alpha(alpha: float, d: float, cfg: QuadratureConfig = DEFAULT_QUAD) -> float:
    """d^{-(alpha+2)} int_0^d int_{arcsin t}^{arcsin d} sin^{alpha+1}.

    Integrating in t first collapses the double integral to I_{alpha+2}(d).
    """
    a, d = check_alpha(alpha), _check_d(d)
    return sine_moment(a + 2.0, d, cfg) / d ** (a + 2.0)


def b_alpha(alpha: float, d: float, cfg: QuadratureConfig = DEFAULT_QUAD) -> float:
    a, d = check_alpha(alpha), _check_d(d)
    return -phi_alpha(a, d, cfg) / d ** (a + 1.0)


def _check_d_derivative(d: float) -> float:
    d = _check_d(d, allow_one=False)
    if d > DERIVATIVE_D_MAX:
        raise DomainError(f"derivatives are restricted to d <= {DERIVATIVE_D_MAX}, got {d}")
    return d


def g_alpha_prime(alpha: float, d: float, cfg: QuadratureConfig = DEFAULT_QUAD) -> float:
    a, d = check_alpha(alpha), _check_d_derivative(d)
    return (-(a + 1.0) * sine_moment(a, d, cfg) / d ** (a + 2.0)
            + 1.0 / (d * math.sqrt(1.0 - d * d)))


def G_alpha_prime(alpha: float, d: float, cfg: QuadratureConfig = DEFAULT_QUAD) -> float:
    a, d = check_alpha(alpha), _check_d_derivative(d)
    return (-(a + 2.0) * sine_moment(a + 2.0, d, cfg) / d ** (a + 3.0)
            + 1.0 / math.sqrt(1.0 - d * d))


def identity_residual(alpha: float, d: float, cfg: QuadratureConfig = DEFAULT_QUAD) -> float:
    """g_alpha'(d) - d G_alpha'(d)."""
    return g_alpha_prime(alpha, d, cfg) - d * G_alpha_prime(alpha, d, cfg)
