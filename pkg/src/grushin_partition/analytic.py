"""Closed-form minimizers of the cut perimeter with a pinned trace.

For v2 = h2 = 0 the center profile of a regular minimizer is a dilated and
vertically shifted isoperimetric profile, f(x) = lam^(alpha+1) phi(x/lam) + y.
The parameters follow from a one-dimensional root problem in d = x0/lam.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from . import special as sp
from .errors import DomainError, InfeasibleSpec, UnsupportedAlpha
from .geometry import ProfileSet
from .special import DEFAULT_QUAD, QuadratureConfig, check_alpha

SUPPORTED_ALPHAS = (0.0, 1.0)

# stated coarse grid plus geometric tails toward both degenerate ends
_SCAN_CORE = np.round(np.arange(1, 100) * 0.01, 2)
_SCAN_LOW = 10.0 ** -np.arange(9.0, 2.0, -0.5)
_SCAN_HIGH = 1.0 - 10.0 ** -np.arange(2.5, 9.5, 0.5)
D_SCAN = np.unique(np.concatenate([_SCAN_LOW, _SCAN_CORE, _SCAN_HIGH]))


@dataclass(frozen=True)
class ClosedFormSolution:
    alpha: float
    d: float
    x0: float
    lam: float
    y_shift: float
    beta: float
    mu_l: float
    h: float
    v1: float

    def to_dict(self) -> dict:
        return {("lambda" if k == "lam" else k): v for k, v in asdict(self).items()}


@dataclass(frozen=True)
class OuterOdeParams:
    k: float
    d_out: float


# -- ODE right-hand sides -----------------------------------------------------------

def center_ode_rhs(alpha: float, c: float, x: float) -> float:
    """Center slope -sgn(x) c |x|^(alpha+1) / sqrt(1 - (c x)^2)."""
    a = check_alpha(alpha)
    if c < 0:
        raise DomainError(f"c must be nonnegative, got {c}")
    u = c * x
    if abs(u) >= 1.0:
        raise DomainError(f"|c x| = {abs(u)} must be < 1")
    return -math.copysign(1.0, x) * c * abs(x) ** (a + 1.0) / math.sqrt(1.0 - u * u) if x else 0.0


def outer_ode_rhs(alpha: float, p: OuterOdeParams, x: float) -> float:
    """Wing slope (k x + d) x^alpha / sqrt(1 - (k x + d)^2), mirrored for x < 0."""
    a = check_alpha(alpha)
    if x == 0:
        raise DomainError("the wing equations are posed away from x = 0")
    u = p.k * x + (p.d_out if x > 0 else -p.d_out)
    rad = 1.0 - u * u
    if rad <= 0:
        raise DomainError(f"|k x ± d| = {abs(u)} must be < 1")
    return u * abs(x) ** a / math.sqrt(rad)


# -- the root problem ------------------------------------------------------------

def _check_open_d(d: float) -> float:
    d = float(d)
    if not (0.0 < d < 1.0):
        raise DomainError(f"d must lie in (0, 1), got {d}")
    return d


def x0_of_d(alpha: float, h: float, d: float) -> float:
    """Partitioning point (d h / sqrt(1 - d^2))^(1/(alpha+1))."""
    a = check_alpha(alpha)
    d = _check_open_d(d)
    if h < 0:
        raise DomainError(f"h must be nonnegative, got {h}")
    return (d * h / math.sqrt((1.0 - d) * (1.0 + d))) ** (1.0 / (a + 1.0))


def volume_residual(alpha: float, h: float, v_quarter: float, d: float,
                    cfg: QuadratureConfig = DEFAULT_QUAD) -> float:
    """x0^(alpha+2) G(d) + h x0 - v_quarter with x0 = x0_of_d(alpha, h, d)."""
    x0 = x0_of_d(alpha, h, d)
    return x0 ** (alpha + 2.0) * sp.G_alpha(alpha, d, cfg) + h * x0 - v_quarter


def _find_root(F, grid: np.ndarray) -> float:
    vals = [F(d) for d in grid]
    bracket = None
    for i in range(len(grid) - 1):
        if vals[i] == 0.0:
            return float(grid[i])
        if vals[i] < 0.0 < vals[i + 1]:
            bracket = i
            break
    if bracket is None:
        raise InfeasibleSpec(
            "no sign change of the volume residual on "
            f"d in [{grid[0]:.1e}, 1 - {1 - grid[-1]:.1e}] "
            f"(F ranges over [{min(vals):.3g}, {max(vals):.3g}])")
    lo, hi = float(grid[bracket]), float(grid[bracket + 1])
    flo, fhi = vals[bracket], vals[bracket + 1]
    while hi - lo > 1e-6 * hi:
        mid = 0.5 * (lo + hi)
        fm = F(mid)
        if fm == 0.0:
            return mid
        if fm < 0:
            lo, flo = mid, fm
        else:
            hi, fhi = mid, fm
    # secant polish kept inside the bracket (Illinois weighting avoids stagnation)
    side = 0
    x, fx = (lo, flo) if abs(flo) < abs(fhi) else (hi, fhi)
    for _ in range(200):
        if abs(fx) <= 1e-12 or hi - lo <= 4e-16 * hi:
            break
        x = hi - fhi * (hi - lo) / (fhi - flo)
        if not (lo < x < hi):
            x = 0.5 * (lo + hi)
        fx = F(x)
        if fx == 0.0:
            break
        if fx < 0:
            lo, flo = x, fx
            if side == -1:
                fhi *= 0.5
            side = -1
        else:
            hi, fhi = x, fx
            if side == 1:
                flo *= 0.5
            side = 1
    return float(x)


def solve_closed_form(alpha: float, v1: float, h: float,
                      cfg: QuadratureConfig = DEFAULT_QUAD,
                      experimental: bool = False) -> ClosedFormSolution:
    """Parameters of the closed-form minimizer for central area v1 and trace h.

    Only alpha in {0, 1} is supported unless ``experimental`` is set; the
    experimental path solves the same system and leaves the validation of the
    derivative identity to the caller (see ``special.identity_residual``).
    """
    a = check_alpha(alpha)
    if a not in SUPPORTED_ALPHAS and not experimental:
        raise UnsupportedAlpha(f"closed form is available for alpha in {{0, 1}}, got {a}")
    v1, h = float(v1), float(h)
    if not (v1 > 0 and math.isfinite(v1)):
        raise InfeasibleSpec(f"central area must be positive, got v1={v1}")
    if not (h > 0 and math.isfinite(h)):
        raise InfeasibleSpec(
            f"trace h={h}: the pinned-trace system needs h > 0 (h = 0 is the"
            " vertical-tangency limit d -> 1, i.e. the isoperimetric set)")
    vq = 0.25 * v1
    d = _find_root(lambda t: volume_residual(a, h, vq, t, cfg), D_SCAN)
    x0 = x0_of_d(a, h, d)
    lam = x0 / d
    phi_d = sp.phi_alpha(a, d, cfg)
    y = h * (1.0 - phi_d / (d ** a * math.sqrt((1.0 - d) * (1.0 + d))))
    beta = h + x0 ** (a + 1.0) * sp.sigma_alpha(a, d, cfg)
    sol = ClosedFormSolution(a, d, x0, lam, y, beta, d / x0, h, v1)
    _check_sign(sol)
    return sol


def _check_sign(sol: ClosedFormSolution) -> None:
    tol = 1e-10 * max(1.0, sol.h)
    if sol.y_shift > tol:
        raise InfeasibleSpec(f"positive vertical shift y={sol.y_shift} (inconsistent solve)")
    if sol.alpha == 0.0 and abs(sol.y_shift) > tol:
        raise InfeasibleSpec(f"alpha=0 must give y=0, got {sol.y_shift}")
    if sol.alpha == 1.0 and not sol.y_shift < 0.0:
        raise InfeasibleSpec(f"alpha=1 must give y<0, got {sol.y_shift} (degenerate d={sol.d})")


# -- profile evaluation -----------------------------------------------------------

def _profile_closed(sol: ClosedFormSolution, x: float, cfg: QuadratureConfig = DEFAULT_QUAD) -> float:
    r = min(abs(x) / sol.lam, 1.0)
    return sol.lam ** (sol.alpha + 1.0) * sp.phi_alpha(sol.alpha, r, cfg) + sol.y_shift


def profile_eval(sol: ClosedFormSolution, x: float, cfg: QuadratureConfig = DEFAULT_QUAD) -> float:
    """Center profile lam^(alpha+1) phi(|x|/lam) + y on (-x0, x0)."""
    if not abs(x) < sol.x0:
        raise DomainError(f"x={x} outside (-x0, x0) = (-{sol.x0}, {sol.x0})")
    return _profile_closed(sol, x, cfg)


def profile_extended(sol: ClosedFormSolution, x: float, cfg: QuadratureConfig = DEFAULT_QUAD) -> float:
    """The center formula continued past x0, for comparison on another solver's grid."""
    return _profile_closed(sol, x, cfg)


def profile_trace(sol: ClosedFormSolution, cfg: QuadratureConfig = DEFAULT_QUAD) -> float:
    """f(x0^-), which equals h for a converged solution."""
    return _profile_closed(sol, sol.x0, cfg)


def profile_slope(sol: ClosedFormSolution, x: float) -> float:
    return sol.lam ** sol.alpha * sp.phi_alpha_prime(sol.alpha, abs(x) / sol.lam) * math.copysign(1.0, x)


def first_integral_value(sol: ClosedFormSolution, x: float) -> float:
    """f'/sqrt(f'^2 + x^(2 alpha)), which is linear in x with slope -1/lam."""
    s = profile_slope(sol, x)
    return s / math.sqrt(s * s + abs(x) ** (2.0 * sol.alpha))


def normal_form_rhs(sol: ClosedFormSolution, x: float) -> float:
    """f'' predicted by the Euler-Lagrange equation in normal form.

    Differentiating q = f'/sqrt(f'^2 + x^(2a)) = -x/lam gives
    f'' = a f'/x - (f'^2 + x^(2a))^(3/2) / (lam x^(2a)).
    """
    a = sol.alpha
    s = profile_slope(sol, x)
    w = abs(x) ** (2.0 * a)
    return a * s / x - (s * s + w) ** 1.5 / (sol.lam * w)


def sample_profile(sol: ClosedFormSolution, n: int = 400,
                   cfg: QuadratureConfig = DEFAULT_QUAD) -> ProfileSet:
    """Center profile on a uniform n-cell grid over [0, x0]; the wall at x0 has height h."""
    if n < 1:
        raise DomainError("n must be positive")
    xs = np.linspace(0.0, sol.x0, n + 1)
    fs = np.array([_profile_closed(sol, x, cfg) for x in xs])
    fs[-1] = sol.h
    return ProfileSet(sol.alpha, xs, np.maximum(fs, 0.0), jump_x0=sol.x0)


def cut_perimeter_exact(sol: ClosedFormSolution, cfg: QuadratureConfig = DEFAULT_QUAD) -> float:
    """4 (x0^(alpha+1) g(d) + h): cut perimeter of the continuum minimizer."""
    return 4.0 * (sol.x0 ** (sol.alpha + 1.0) * sp.g_alpha(sol.alpha, sol.d, cfg) + sol.h)


def lagrange_residuals(sol: ClosedFormSolution, v1: float, h: float,
                       cfg: QuadratureConfig = DEFAULT_QUAD) -> tuple[float, float, float]:
    a, d, x0, mu = sol.alpha, sol.d, sol.x0, sol.mu_l
    g = sp.g_alpha(a, d, cfg)
    G = sp.G_alpha(a, d, cfg)
    r1 = sp.g_alpha_prime(a, d, cfg) * x0 ** (a + 1.0) - mu * x0 ** (a + 2.0) * sp.G_alpha_prime(a, d, cfg)
    r2 = (a + 1.0) * x0 ** a * g - mu * ((a + 2.0) * x0 ** (a + 1.0) * G + h)
    r3 = x0 ** (a + 2.0) * G + h * x0 - 0.25 * v1
    return float(r1), float(r2), float(r3)


def solution_record(sol: ClosedFormSolution, cfg: QuadratureConfig = DEFAULT_QUAD) -> dict:
    """JSON-ready record: solution fields plus the three Lagrange residuals."""
    r1, r2, r3 = lagrange_residuals(sol, sol.v1, sol.h, cfg)
    out = sol.to_dict()
    out.update(r1=r1, r2=r2, r3=r3, cut_perimeter=cut_perimeter_exact(sol, cfg),
               identity_residual=sp.identity_residual(sol.alpha, sol.d, cfg)
               if sol.d <= sp.DERIVATIVE_D_MAX else None)
    return out
