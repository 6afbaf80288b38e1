"""Brute-force checks that do not rely on the closed form.

* ``direct_minimize`` minimizes the discretized cut perimeter over monotone
  profiles with a pinned trace and a prescribed area.
* ``first_integral_residual`` tests the Euler-Lagrange first integral on
  sampled profiles.
* ``cut_competitor`` and ``vertical_slope_expansion`` evaluate the
  chord-replacement competitor near the partitioning point.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.optimize import minimize_scalar

from . import special as sp
from .errors import DomainError, FitError, InfeasibleSpec, NonConvergent
from .geometry import PartitionSpec, ProfileSet, _slice, arc_lengths, cut_perimeter
from .special import QuadratureConfig, check_alpha, integrate

# epsilon scans reach 1e-5 x0, so absolute tolerances must sit far below eps^(3/2)
_FINE_QUAD = QuadratureConfig(abs_tol=1e-300, rel_tol=1e-12, max_subdivisions=200)


@dataclass(frozen=True)
class OracleConfig:
    n_grid: int = 400
    x0_bracket: tuple[float, float] | None = None
    x0_scan_points: int = 40
    max_iters: int = 500
    grad_tol: float = 1e-10
    constraint_tol: float = 1e-9

    def __post_init__(self) -> None:
        if int(self.n_grid) != self.n_grid or self.n_grid < 16:
            raise DomainError(f"n_grid must be an integer >= 16, got {self.n_grid}")
        if self.x0_bracket is not None:
            lo, hi = self.x0_bracket
            if not (0 < lo < hi):
                raise DomainError(f"x0_bracket must satisfy 0 < low < high, got {self.x0_bracket}")
        if self.x0_scan_points < 3:
            raise DomainError("x0_scan_points must be at least 3")
        if self.max_iters < 1:
            raise DomainError("max_iters must be positive")
        if not (self.grad_tol > 0 and self.constraint_tol > 0):
            raise DomainError("tolerances must be positive")


@dataclass(frozen=True)
class MinimizerResult:
    profile: ProfileSet
    x0: float
    perimeter: float
    iterations: int

    def __iter__(self):
        # unpacks as (profile, x0, perimeter)
        return iter((self.profile, self.x0, self.perimeter))


@dataclass(frozen=True)
class CompetitorReport:
    eps: float
    a_eps: float
    b_eps: float
    margin: float
    m_eps: float
    y_eps: float
    x0: float
    perimeter_cut: float
    perimeter_competitor: float

    @property
    def identity_gap(self) -> float:
        """P(F_eps) - [P(E cut at x0) - 4 (A - B/x0)]; zero up to quadrature error."""
        return self.perimeter_competitor - (self.perimeter_cut - 4.0 * (self.a_eps - self.b_eps / self.x0))


# -- discrete functional ---------------------------------------------------------

def _grid(x0: float, n: int) -> tuple[np.ndarray, np.ndarray, float]:
    xs = np.linspace(0.0, x0, n + 1)
    return xs, 0.5 * (xs[:-1] + xs[1:]), x0 / n


def discrete_perimeter(f: np.ndarray, x0: float, alpha: float, h: float) -> float:
    """4 { sum_i sqrt(df_i^2 + xbar_i^(2 alpha) dx^2) + h } with f_N = h appended."""
    f = np.asarray(f, dtype=float)
    _, xm, dx = _grid(x0, len(f))
    df = np.diff(np.append(f, h))
    return 4.0 * (float(np.sum(np.hypot(df, xm ** alpha * dx))) + h)


def discrete_perimeter_grad(f: np.ndarray, x0: float, alpha: float, h: float) -> np.ndarray:
    f = np.asarray(f, dtype=float)
    _, xm, dx = _grid(x0, len(f))
    df = np.diff(np.append(f, h))
    q = df / np.hypot(df, xm ** alpha * dx)
    g = np.zeros_like(f)
    g[1:] += q[:-1]
    g -= q
    return 4.0 * g


def discrete_area(f: np.ndarray, x0: float, h: float) -> float:
    f = np.asarray(f, dtype=float)
    xs = np.linspace(0.0, x0, len(f) + 1)
    full = np.append(f, h)
    return 4.0 * float(np.sum(np.diff(xs) * 0.5 * (full[1:] + full[:-1])))


def _project(z: np.ndarray, wdiag: np.ndarray, a: np.ndarray, target: float) -> np.ndarray:
    """argmin sum_i wdiag_i (u_i - z_i)^2 subject to a.u = target, u >= 0.

    u(nu) = max(0, z + nu a / wdiag) is piecewise linear in nu; the breakpoint
    containing the root is located by sorting, then the root is exact.
    """
    c = a / wdiag
    order = np.argsort(-z / c)
    bs = (-z / c)[order]
    slope = np.cumsum((a * c)[order])
    inter = np.cumsum((a * z)[order])
    # on [bs[k], bs[k+1]] the active set is order[:k+1] and a.u = inter[k] + slope[k] nu
    vals = inter + slope * bs
    k = max(int(np.searchsorted(vals, target, side="right")) - 1, 0)
    nu = (target - inter[k]) / slope[k]
    return np.maximum(0.0, z + nu * c)


def _inner_solve(alpha: float, v1: float, h: float, x0: float, n: int,
                 max_iters: int, grad_tol: float) -> tuple[np.ndarray, float, int, float]:
    """Minimize the discrete cut perimeter at fixed x0.

    Works in slope variables u_i = f_i - f_{i+1} >= 0, where the objective is
    separable and the area is linear.  Returns (f, value, iterations, kkt).
    Stagnation at roundoff level stops the iteration; the caller decides
    whether the reported KKT error is acceptable.
    """
    _, xm, dx = _grid(x0, n)
    target = 0.25 * v1 - h * x0
    if target < -1e-15 * max(1.0, 0.25 * v1):
        raise InfeasibleSpec(f"area {v1} cannot be met with f >= h={h} on [0, {x0}]")
    target = max(target, 0.0)
    w = xm ** alpha * dx
    a = xm  # quarter area = h x0 + sum_i xbar_i u_i

    def objective(u):
        return float(np.sum(np.hypot(u, w)))

    def kkt_of(u):
        r = np.hypot(u, w)
        g = u / r
        # multiplier fitted on the free set; bound entries have g_i = 0
        free = u > 0
        if not np.any(free):
            return g, r, math.inf
        mult = float(g[free] @ a[free] / (a[free] @ a[free]))
        kkt = g - mult * a
        return g, r, max(np.max(np.abs(kkt[free]), initial=0.0), -np.min(kkt[~free], initial=0.0))

    u = a * (target / float(a @ a))
    val = objective(u)
    kkt_err, it = 0.0, 0
    while target > 0.0:
        g, r, kkt_err = kkt_of(u)
        if kkt_err <= grad_tol or it >= max_iters or not math.isfinite(kkt_err):
            break
        it += 1
        hdiag = w * w / r ** 3
        un = _project(u - g / hdiag, hdiag, a, target)
        au = float(a @ un)
        if not (np.all(np.isfinite(un)) and abs(au - target) <= 1e-10 * target):
            # the full Newton move cancels catastrophically; bound it by the slope scale
            hdiag = np.maximum(hdiag, np.abs(g) / (10.0 * float(u.max())))
            un = _project(u - g / hdiag, hdiag, a, target)
            au = float(a @ un)
        if au > 0:
            un *= target / au  # clean up roundoff in the constraint
        step = un - u
        slope = float(g @ step)
        cand = None
        if slope < -1e-14 * val:
            t = 1.0
            while t >= 1e-10:
                trial = u + t * step
                cv = objective(trial)
                if cv <= val + 1e-4 * t * slope:
                    cand = trial
                    break
                t *= 0.5
        if cand is None:
            # the decrease is below what the objective resolves; take the full
            # Newton step as long as it improves stationarity
            trial = u + step
            if kkt_of(trial)[2] >= kkt_err:
                break
            cand, cv = trial, objective(trial)
        u, val = cand, cv
    f = h + np.cumsum(u[::-1])[::-1]
    return f, discrete_perimeter(f, x0, alpha, h), it, kkt_err


def default_x0_bracket(spec: PartitionSpec) -> tuple[float, float]:
    if spec.h1 > 0:
        hi = spec.v1 / (4.0 * spec.h1)
    else:
        hi = 2.0 * (spec.v1 / sp.iso_area(spec.alpha)) ** (1.0 / (spec.alpha + 2.0))
    return 1e-3 * hi, hi


def direct_minimize(spec: PartitionSpec, cfg: OracleConfig = OracleConfig()) -> MinimizerResult:
    """Discrete minimizer of the cut perimeter for v2 = h2 = 0."""
    if spec.v2 != 0 or spec.h2 != 0:
        raise DomainError("direct_minimize handles the center-only problem (v2 = h2 = 0)")
    if not spec.v1 > 0:
        raise InfeasibleSpec("central area must be positive")
    alpha, v1, h, n = spec.alpha, spec.v1, spec.h1, int(cfg.n_grid)
    lo, hi = cfg.x0_bracket or default_x0_bracket(spec)
    if h > 0:
        hi = min(hi, v1 / (4.0 * h))
    if not lo < hi:
        raise InfeasibleSpec(f"empty x0 bracket [{lo}, {hi}] for v1={v1}, h1={h}")

    cache: dict[float, tuple[np.ndarray, float, int, float]] = {}

    def value(x0: float) -> float:
        if x0 not in cache:
            try:
                cache[x0] = _inner_solve(alpha, v1, h, x0, n, cfg.max_iters, cfg.grad_tol)
            except InfeasibleSpec:
                return math.inf
        return cache[x0][1]

    grid = np.linspace(lo, hi, cfg.x0_scan_points)
    vals = np.array([value(x) for x in grid])
    if not np.any(np.isfinite(vals)):
        raise InfeasibleSpec(f"no scanned x0 in [{lo}, {hi}] admits the area constraint")
    k = int(np.argmin(vals))
    a = grid[max(k - 1, 0)]
    b = grid[min(k + 1, len(grid) - 1)]
    res = minimize_scalar(value, bounds=(a, b), method="bounded",
                          options={"xatol": 1e-10 * b, "maxiter": 200})
    best = float(res.x) if res.fun <= vals[k] else float(grid[k])
    value(best)
    f, per, iters, kkt = cache[best]
    if kkt > cfg.grad_tol:
        raise NonConvergent(f"inner solve at x0={best} stopped with KKT error {kkt:.2e} > {cfg.grad_tol}")
    xs = np.linspace(0.0, best, n + 1)
    profile = ProfileSet(alpha, xs, np.append(f, h), jump_x0=best)
    area_err = abs(discrete_area(f, best, h) - v1)
    if area_err > cfg.constraint_tol * v1:
        raise NonConvergent(f"area constraint violated by {area_err:.3e}")
    return MinimizerResult(profile, best, per, iters)


def closed_form_distance(E: ProfileSet, sol, points_per_cell: int = 8) -> float:
    """Sup over [0, x0_E] of |f_E - f_closed|, sampled inside every cell.

    The closed-form profile is continued past its own x0 when the discrete
    partitioning point lies further out.
    """
    from .analytic import profile_extended

    xs = E.xs[E.xs <= E.r0]
    t = np.arange(points_per_cell + 1) / points_per_cell
    pts = np.unique((xs[:-1, None] + t[None, :] * np.diff(xs)[:, None]).ravel())
    mine = np.interp(pts, E.xs, E.fs)
    theirs = np.array([profile_extended(sol, x) for x in pts])
    return float(np.max(np.abs(mine - theirs)))


# -- Euler-Lagrange first integral -------------------------------------------------

def first_integral_values(xs, fs, alpha: float) -> tuple[np.ndarray, np.ndarray]:
    """Cell midpoints and q_i = df_i / sqrt(df_i^2 + xbar_i^(2 alpha) dx_i^2)."""
    xs = np.asarray(xs, dtype=float)
    fs = np.asarray(fs, dtype=float)
    dx = np.diff(xs)
    keep = dx > 0
    xm = (0.5 * (xs[:-1] + xs[1:]))[keep]
    df = np.diff(fs)[keep]
    return xm, df / np.hypot(df, xm ** alpha * dx[keep])


def first_integral_residual(xs, fs, alpha: float) -> float:
    """Max deviation of q_i from its least-squares line through the origin."""
    xm, q = first_integral_values(xs, fs, check_alpha(alpha))
    k = float(q @ xm / (xm @ xm))
    return float(np.max(np.abs(q - k * xm)))


# -- chord competitor ------------------------------------------------------

@dataclass(frozen=True)
class _Profile1D:
    """f, f' and the total variation of f on [0, x0], with quadrature breakpoints."""
    f: Callable[[float], float]
    df: Callable[[float], float]
    variation: Callable[[float, float], float]
    breaks: tuple[float, ...]
    f_left: float  # f(x0^-)


def _from_profileset(E: ProfileSet, x0: float, lo: float) -> _Profile1D:
    sx, sf = _slice(E, 0.0, x0)
    wall = np.flatnonzero(np.diff(sx) == 0)
    if np.any(sx[wall] > lo):
        raise DomainError(f"the chord construction needs a profile without walls on ({lo}, {x0})")
    keep = np.r_[np.diff(sx) > 0, True]  # a wall at sx[i] keeps its right value
    px, pf = sx[keep], sf[keep]
    slopes = np.diff(pf) / np.diff(px)

    def f(x):
        return float(np.interp(x, px, pf))

    def df(x):
        j = min(max(int(np.searchsorted(px, x, side="right")) - 1, 0), len(slopes) - 1)
        return float(slopes[j])

    def variation(a, b):
        nodes = np.concatenate(([a], px[(px > a) & (px < b)], [b]))
        return float(np.sum(np.abs(np.diff([f(t) for t in nodes]))))

    return _Profile1D(f, df, variation, tuple(px), float(pf[-1]))


def _margin_terms(p: _Profile1D, alpha: float, x0: float, eps: float,
                  cfg: QuadratureConfig) -> tuple[float, float, float]:
    """Return (A, B, m) for the chord replacement on [x0 - eps, x0]."""
    lo = x0 - eps
    f_lo = p.f(lo)
    m = (p.f_left - eps - f_lo) / eps
    twoa = 2.0 * alpha

    # sqrt(s^2 + w) = s + w / (sqrt(s^2 + w) + s) keeps steep slopes free of cancellation
    def gap(x):
        w = x ** twoa
        s = abs(p.df(x))
        return w / (math.sqrt(s * s + w) + s) - w / (math.sqrt(m * m + w) + abs(m))

    pts = tuple(b for b in p.breaks if lo < b < x0)
    a_eps = integrate(gap, lo, x0, cfg, pts) + p.variation(lo, x0) - abs(m) * eps + eps

    def chord_gap(x):
        return p.f(x) - (m * (x - x0) + p.f_left - eps)

    b_eps = integrate(chord_gap, lo, x0, cfg, pts)
    return a_eps, b_eps, m


def cut_competitor(E: ProfileSet, x0: float, h1: float, eps: float,
                   cfg: QuadratureConfig = _FINE_QUAD) -> CompetitorReport:
    """Replace E on [x0 - eps, x0] by the chord that lowers the trace by eps."""
    x0, eps = float(x0), float(eps)
    if not (0.0 < x0 <= E.r0):
        raise DomainError(f"x0={x0} outside (0, r0]")
    p = _from_profileset(E, x0, x0 - eps)
    if not p.f_left > h1:
        raise DomainError(f"need f(x0^-)={p.f_left} > h1={h1}")
    if not (0.0 < eps < p.f_left - h1 and eps < x0):
        raise DomainError(f"eps={eps} must lie in (0, min(f(x0^-) - h1, x0))")
    alpha = E.alpha
    a_eps, b_eps, m = _margin_terms(p, alpha, x0, eps, cfg)
    y_eps = b_eps / x0
    per_cut = cut_perimeter(E, x0)
    per_comp = _competitor_perimeter(E, x0, eps, m, y_eps)
    return CompetitorReport(eps, a_eps, b_eps, x0 * a_eps - b_eps, m, y_eps, x0, per_cut, per_comp)


def _competitor_perimeter(E: ProfileSet, x0: float, eps: float, m: float, y_eps: float) -> float:
    """Perimeter of the shifted competitor, built as a profile set and measured directly."""
    lo = x0 - eps
    sx, sf = _slice(E, 0.0, x0)
    keep = sx < lo
    f_lo = E.limit_left(lo) if lo > 0 else float(sf[0])
    xs = np.concatenate((sx[keep], [lo, x0]))
    fs = np.concatenate((sf[keep], [f_lo, f_lo + m * eps])) + y_eps
    per = arc_lengths(alpha=E.alpha, xs=xs, fs=fs).sum()
    dxs = np.diff(xs)
    walls = np.abs(np.diff(fs))[dxs == 0].sum()
    return 4.0 * float(per + walls + fs[-1])


def isoperimetric_cut(alpha: float, lam: float = 1.0) -> _Profile1D:
    """Dilated isoperimetric profile lam^(alpha+1) phi(x/lam) on [0, lam]."""
    p = alpha + 1.0

    def f(x):
        return lam ** p * sp.phi_alpha(alpha, min(x / lam, 1.0), _FINE_QUAD)

    def df(x):
        r = x / lam
        return -math.inf if r >= 1.0 else lam ** alpha * sp.phi_alpha_prime(alpha, r)

    def variation(a, b):
        return f(a) - f(b)

    return _Profile1D(f, df, variation, (0.0, lam), 0.0)


DEFAULT_EPS_FRACTIONS = tuple(np.geomspace(1e-2, 1e-5, 13))


@dataclass(frozen=True)
class SlopeExpansionFit:
    exponent: float
    coefficient: float
    exponent_stderr: float
    coefficient_stderr: float
    eps: tuple[float, ...]
    a_eps: tuple[float, ...]
    b_eps: tuple[float, ...]
    margins: tuple[float, ...]

    def __iter__(self):
        return iter((self.exponent, self.coefficient))


def competitor_table(alpha: float, lam: float = 1.0,
                     eps_fractions=DEFAULT_EPS_FRACTIONS) -> list[tuple[float, float, float, float]]:
    """(eps, A, B, margin) rows for the vertical-tangency cut at x0 = lam."""
    a = check_alpha(alpha)
    p = isoperimetric_cut(a, lam)
    rows = []
    for frac in eps_fractions:
        eps = float(frac) * lam
        A, B, _ = _margin_terms(p, a, lam, eps, _FINE_QUAD)
        rows.append((eps, A, B, lam * A - B))
    return rows


def vertical_slope_expansion(alpha: float, lam: float = 1.0,
                             eps_fractions=DEFAULT_EPS_FRACTIONS) -> SlopeExpansionFit:
    """Fit margin(eps) ~ C x0^(alpha+2) (eps/x0)^p at the vertical-tangency cut.

    The exponent p comes from a log-log least-squares line.  The leading
    coefficient is estimated from margin / (x0^(alpha+2) t^(3/2)) = C + D t^(1/2)
    with t = eps/x0, which removes the first correction term of the expansion.
    The returned coefficient is C x0^(alpha+2).
    """
    rows = competitor_table(alpha, lam, eps_fractions)
    eps = np.array([r[0] for r in rows])
    margins = np.array([r[3] for r in rows])
    if len(rows) < 3:
        raise FitError("need at least three eps values")
    if not np.all(margins < 0):
        raise FitError("margins are not uniformly negative; the vertical-tangency expansion does not apply")
    t = eps / lam
    X = np.vstack([np.log(t), np.ones_like(t)]).T
    coef, res, *_ = np.linalg.lstsq(X, np.log(-margins), rcond=None)
    dof = max(len(t) - 2, 1)
    s2 = float(np.sum((X @ coef - np.log(-margins)) ** 2)) / dof
    cov = s2 * np.linalg.inv(X.T @ X)
    scale = lam ** (alpha + 2.0)
    Y = margins / (scale * t ** 1.5)
    Z = np.vstack([np.ones_like(t), np.sqrt(t)]).T
    c2, *_ = np.linalg.lstsq(Z, Y, rcond=None)
    s2b = float(np.sum((Z @ c2 - Y) ** 2)) / dof
    covb = s2b * np.linalg.inv(Z.T @ Z)
    return SlopeExpansionFit(
        exponent=float(coef[0]),
        coefficient=float(c2[0] * scale),
        exponent_stderr=float(math.sqrt(cov[0, 0])),
        coefficient_stderr=float(math.sqrt(covb[0, 0]) * scale),
        eps=tuple(eps), a_eps=tuple(r[1] for r in rows), b_eps=tuple(r[2] for r in rows),
        margins=tuple(margins),
    )


def margin_slope_at_zero(E: ProfileSet, x0: float, h1: float,
                         eps_values=tuple(np.geomspace(1e-3, 1e-5, 9))) -> float:
    """Intercept of margin(eps)/eps extrapolated linearly to eps = 0."""
    eps = np.asarray(eps_values, dtype=float)
    ratio = np.array([cut_competitor(E, x0, h1, e).margin / e for e in eps])
    slope, intercept = np.polyfit(eps, ratio, 1)
    return float(intercept)


def slope_lower_bound(alpha: float, x0: float, slope_left: float) -> float:
    """1 + sqrt(s^2 + x0^(2a)) - sqrt((s - 1)^2 + x0^(2a)) for the one-sided slope s."""
    w = x0 ** (2.0 * alpha)
    return 1.0 + math.sqrt(slope_left ** 2 + w) - math.sqrt((slope_left - 1.0) ** 2 + w)
