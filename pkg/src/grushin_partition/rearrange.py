"""Perimeter-reducing rearrangements of partitioned profile sets.

The pipeline used by ``regularize`` is

1. glue: close up intervals where the profile vanishes;
2. reflect: lift the center above its trace level, f -> |f - q| + q;
3. convexify the center in the Psi-plane, re-cut it to restore the area;
4. convexify the wings in the Psi-plane and trim them to restore their area.

Psi(x, y) = (sgn x |x|^(a+1)/(a+1), y) turns the alpha-perimeter into the
Euclidean perimeter and Lebesgue area into the weighted measure mu.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateInput, DomainError, InfeasibleSpec
from .geometry import (
    PartitionSpec,
    ProfileSet,
    center_area,
    trace_left,
    trace_right,
    wing_area,
)
from .special import DEFAULT_QUAD, QuadratureConfig, check_alpha, integrate


@dataclass(frozen=True)
class PsiPoint:
    xi: float
    eta: float


# -- change of variables -------------------------------------------------------

def psi_x(alpha: float, x):
    p = alpha + 1.0
    x = np.asarray(x, dtype=float)
    return np.sign(x) * np.abs(x) ** p / p


def phi_xi(alpha: float, xi):
    p = alpha + 1.0
    xi = np.asarray(xi, dtype=float)
    return np.sign(xi) * np.abs(p * xi) ** (1.0 / p)


def psi_map(alpha: float, p: tuple[float, float]) -> PsiPoint:
    a = check_alpha(alpha)
    x, y = p
    return PsiPoint(float(psi_x(a, x)), float(y))


def phi_map(alpha: float, q: PsiPoint) -> tuple[float, float]:
    a = check_alpha(alpha)
    return float(phi_xi(a, q.xi)), float(q.eta)


def mu_weight(alpha: float, xi: float) -> float:
    return abs((alpha + 1.0) * xi) ** (-alpha / (alpha + 1.0))


def mu_measure(alpha: float, rect: tuple[float, float, float, float],
               cfg: QuadratureConfig = DEFAULT_QUAD) -> float:
    """mu of the rectangle [xi0, xi1] x [eta0, eta1]."""
    a = check_alpha(alpha)
    xi0, xi1, eta0, eta1 = map(float, rect)
    if not (xi0 <= xi1 and eta0 <= eta1):
        raise DomainError(f"degenerate rectangle {rect}")
    if a == 0.0:
        return (xi1 - xi0) * (eta1 - eta0)
    w = lambda t: mu_weight(a, t)  # noqa: E731
    if xi0 < 0.0 < xi1:
        width = integrate(w, xi0, 0.0, cfg) + integrate(w, 0.0, xi1, cfg)
    else:
        width = integrate(w, xi0, xi1, cfg)
    return width * (eta1 - eta0)


def _mu_w0(alpha: float, xi):
    # int_0^xi of the weight, xi >= 0
    return ((alpha + 1.0) * np.asarray(xi)) ** (1.0 / (alpha + 1.0))


def _mu_w1(alpha: float, xi):
    # int_0^xi of s * weight(s), xi >= 0
    p = alpha + 1.0
    return p ** (-alpha / p) * p / (alpha + 2.0) * np.asarray(xi) ** ((alpha + 2.0) / p)


def refine(xs: np.ndarray, fs: np.ndarray, density: int) -> tuple[np.ndarray, np.ndarray]:
    """Split each positive-width cell into ``density`` equal parts (same set)."""
    density = int(density)
    if density < 1:
        raise DomainError("density must be a positive integer")
    if density == 1:
        return np.asarray(xs, float), np.asarray(fs, float)
    ox, of = [], []
    t = np.arange(density) / density
    for i in range(len(xs) - 1):
        a, b = xs[i], xs[i + 1]
        if b > a:
            ox.append(a + t * (b - a))
            of.append(fs[i] + t * (fs[i + 1] - fs[i]))
        else:
            ox.append([a])
            of.append([fs[i]])
    ox.append([xs[-1]])
    of.append([fs[-1]])
    return np.concatenate(ox), np.concatenate(of)


def psi_image(E: ProfileSet, density: int = 64) -> ProfileSet:
    """Psi(E) as an alpha = 0 profile set in the xi-plane.

    The image of each x-linear segment is a curve; it is resampled with
    ``density`` points per input cell.
    """
    xs, fs = refine(E.xs, E.fs, density)
    jump = None if E.jump_x0 is None else float(psi_x(E.alpha, E.jump_x0))
    xi = psi_x(E.alpha, xs)
    if jump is not None and not np.any(xi == jump):
        jump = None
    return ProfileSet(0.0, xi, fs, jump)


def mu_area(F_xi: ProfileSet, alpha: float) -> float:
    """mu-measure of an xi-plane profile set (exact for xi-linear segments)."""
    a = check_alpha(alpha)
    xi, g = F_xi.xs, F_xi.fs
    xa, xb = xi[:-1], xi[1:]
    ga, gb = g[:-1], g[1:]
    live = xb > xa
    xa, xb, ga, gb = xa[live], xb[live], ga[live], gb[live]
    k = (gb - ga) / (xb - xa)
    w0 = _mu_w0(a, xb) - _mu_w0(a, xa)
    w1 = _mu_w1(a, xb) - _mu_w1(a, xa)
    return 4.0 * float(np.sum((ga - k * xa) * w0 + k * w1))


# -- hulls -------------------------------------------------------------------------

def upper_hull(px: np.ndarray, py: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vertices of the upper concave envelope (monotone chain)."""
    order = np.lexsort((py, px))
    px, py = np.asarray(px, float)[order], np.asarray(py, float)[order]
    ux, start = np.unique(px, return_index=True)
    uy = np.maximum.reduceat(py, start)
    hx: list[float] = []
    hy: list[float] = []
    for x, y in zip(ux, uy):
        while len(hx) >= 2 and (hx[-1] - hx[-2]) * (y - hy[-2]) - (hy[-1] - hy[-2]) * (x - hx[-2]) >= 0:
            hx.pop()
            hy.pop()
        hx.append(x)
        hy.append(y)
    return np.array(hx), np.array(hy)


def _center_and_wings(E: ProfileSet, x0: float):
    """Split the sample arrays at x0 into center (through f(x0^-)) and wings (from f(x0^+))."""
    E = E.with_node(x0) if x0 < E.r0 else E
    xs, fs = E.xs, E.fs
    first = int(np.searchsorted(xs, x0, side="left"))
    last = int(np.searchsorted(xs, x0, side="right")) - 1
    return E, (xs[: first + 1], fs[: first + 1]), (xs[last:], fs[last:])


def _join(alpha: float, center, wings, x0: float) -> ProfileSet:
    cx, cf = center
    wx, wf = wings
    if len(wx) <= 1:
        return ProfileSet(alpha, cx, cf, jump_x0=x0)
    return ProfileSet(alpha, np.concatenate((cx, wx)), np.concatenate((cf, wf)), jump_x0=x0)


# -- step 1: gluing ----------------------------------------------------------------

def _holes(xs: np.ndarray, fs: np.ndarray) -> list[tuple[float, float]]:
    """Maximal positive-length intervals on which f vanishes identically."""
    out: list[list[float]] = []
    for i in range(len(xs) - 1):
        if xs[i + 1] > xs[i] and fs[i] == 0.0 and fs[i + 1] == 0.0:
            if out and out[-1][1] == xs[i]:
                out[-1][1] = float(xs[i + 1])
            else:
                out.append([float(xs[i]), float(xs[i + 1])])
    return [(a, b) for a, b in out]


def glue_holes(E: ProfileSet, x0: float) -> tuple[ProfileSet, float]:
    """Remove zero-profile intervals by sliding the outer parts inward."""
    x0 = float(x0)
    if not (0.0 < x0 < E.r0):
        raise DomainError(f"x0={x0} outside (0, r0={E.r0})")
    if not np.any(E.fs > 0):
        raise DegenerateInput("the set has zero area")
    E = E.with_node(x0)
    xs, fs = np.array(E.xs), np.array(E.fs)
    # zeros after the last positive sample lie outside the support, not in holes
    last_pos = int(np.flatnonzero(fs > 0)[-1])
    xs, fs = xs[: last_pos + 2], fs[: last_pos + 2]
    if x0 >= xs[-1]:
        raise DegenerateInput("the partitioning point lies outside the support")
    holes = _holes(xs, fs)

    def shift(x):
        for a, b in holes:
            if a <= x <= b:
                x = a  # a closed hole collapses onto its left end
                break
        return x - sum(b - a for a, b in holes if b <= x)

    inside = np.zeros(len(xs), dtype=bool)
    for a, b in holes:
        inside |= (xs > a) & (xs < b)
    kept = xs[~inside]
    nx = np.maximum.accumulate(np.array([shift(x) for x in kept]))
    nf = fs[~inside]
    # a hole starting at 0 leaves a wall at x = 0, which is interior after gluing
    while len(nx) > 2 and nx[1] == 0.0:
        nx, nf = nx[1:], nf[1:]
    new_x0 = shift(x0)
    out = ProfileSet(E.alpha, nx, nf)
    return out.with_node(new_x0).replace(jump_x0=new_x0), new_x0


# -- step 2: reflection --------------------------------------------------------------

def reflect_above_trace(E: ProfileSet, x0: float, q_minus: float, tol: float = 1e-9) -> ProfileSet:
    """Replace f by |f - q| + q on [0, x0); the wings are untouched.

    Meant to run after glue_holes: a zero interval has no boundary, and its
    reflection at height 2q does.
    """
    x0 = float(x0)
    actual = trace_left(E, x0).half_width
    if abs(actual - q_minus) > tol * max(1.0, abs(actual)):
        raise DomainError(f"q_minus={q_minus} does not match the left trace {actual}")
    q = float(actual)
    E, (cx, cf), wings = _center_and_wings(E, x0)
    # add the level crossings so the reflected profile stays piecewise linear
    nx, nf = [cx[0]], [cf[0]]
    for i in range(len(cx) - 1):
        a, b, fa, fb = cx[i], cx[i + 1], cf[i], cf[i + 1]
        if b > a and (fa - q) * (fb - q) < 0:
            t = (q - fa) / (fb - fa)
            nx.append(a + t * (b - a))
            nf.append(q)
        nx.append(b)
        nf.append(fb)
    nf_arr = np.abs(np.array(nf) - q) + q
    nf_arr[-1] = q
    return _join(E.alpha, (np.array(nx), nf_arr), wings, x0)


# -- step 3: convexification -------------------------------------------------------

def _hull_values(alpha: float, xs: np.ndarray, fs: np.ndarray, mirror: bool) -> np.ndarray:
    xi = psi_x(alpha, xs)
    if mirror:
        px, py = np.concatenate((-xi[::-1], xi)), np.concatenate((fs[::-1], fs))
    else:
        px, py = xi, fs
    hx, hy = upper_hull(px, py)
    return np.interp(xi, hx, hy), np.isin(xi, hx)


def _hull_profile(alpha: float, xs: np.ndarray, fs: np.ndarray, density: int, mirror: bool):
    # keep the input nodes plus the hull vertices: on non-increasing pieces an
    # x-linear segment lies below its xi-chord, so a second pass is a no-op there.
    # Rising pieces bulge above the chord and keep the refined nodes.
    rx, rf = refine(xs, fs, density)
    hv, vertex = _hull_values(alpha, rx, rf, mirror)
    rising = np.zeros(len(rx), bool)
    up = np.diff(hv) > 0
    rising[:-1] |= up
    rising[1:] |= up
    keep = vertex | rising | np.isin(rx, xs)
    return rx[keep], np.maximum(hv, rf)[keep]


def convexify_center(E: ProfileSet, x0: float, density: int = 4) -> ProfileSet:
    """Replace the center by Phi of the convex hull of its Psi-image."""
    x0 = float(x0)
    if not (0.0 < x0 <= E.r0):
        raise DomainError(f"x0={x0} outside (0, r0={E.r0}]")
    if center_area(E, x0) <= 0.0:
        raise DegenerateInput("the center has zero area")
    E, (cx, cf), wings = _center_and_wings(E, x0)
    return _join(E.alpha, _hull_profile(E.alpha, cx, cf, density, mirror=True), wings, x0)


def convexify_wings(E: ProfileSet, x0: float, density: int = 4) -> ProfileSet:
    """Replace the wings by Phi of the convex hull of their Psi-image."""
    x0 = float(x0)
    if not (0.0 < x0 < E.r0):
        raise DomainError(f"x0={x0} outside (0, r0={E.r0})")
    E, center, (wx, wf) = _center_and_wings(E, x0)
    return _join(E.alpha, center, _hull_profile(E.alpha, wx, wf, density, mirror=False), x0)


# -- cumulative-area cuts ----------------------------------------------------------

def _cut_at_area(xs: np.ndarray, fs: np.ndarray, target: float) -> float:
    """Abscissa where int_{xs[0]}^x f reaches ``target`` (piecewise linear f)."""
    dx = np.diff(xs)
    cells = dx * 0.5 * (fs[1:] + fs[:-1])
    cum = np.concatenate(([0.0], np.cumsum(cells)))
    if target >= cum[-1]:
        return float(xs[-1])
    if target <= 0.0:
        return float(xs[0])
    i = int(np.searchsorted(cum, target, side="right")) - 1
    while dx[i] == 0.0:
        i += 1
    rem = target - cum[i]
    fa, s = fs[i], (fs[i + 1] - fs[i]) / dx[i]
    # fa t + s t^2 / 2 = rem, stable root
    if s == 0.0:
        t = rem / fa
    else:
        disc = max(fa * fa + 2.0 * s * rem, 0.0)
        t = 2.0 * rem / (fa + math.sqrt(disc)) if fa > 0 else math.sqrt(2.0 * rem / s)
    return float(min(xs[i] + t, xs[i + 1]))


def _truncate(xs: np.ndarray, fs: np.ndarray, x: float) -> tuple[np.ndarray, np.ndarray]:
    """Samples on [xs[0], x] ending with the left limit at x."""
    if x >= xs[-1]:
        return xs, fs
    j = int(np.searchsorted(xs, x, side="left"))
    if xs[j] == x:
        v = fs[j]
    else:
        v = fs[j - 1] + (x - xs[j - 1]) / (xs[j] - xs[j - 1]) * (fs[j] - fs[j - 1])
    return np.append(xs[:j], x), np.append(fs[:j], v)


# -- full pipeline ------------------------------------------------------------------

def check_membership(E: ProfileSet, x0: float, spec: PartitionSpec, rtol: float = 1e-8) -> None:
    """Raise InfeasibleSpec unless E (split at x0) lies in the class of ``spec``."""
    if E.alpha != spec.alpha:
        raise InfeasibleSpec(f"alpha mismatch: set {E.alpha}, spec {spec.alpha}")
    c = center_area(E, x0)
    w = wing_area(E, x0)
    if abs(c - spec.v1) > rtol * max(spec.v1, 1e-300):
        raise InfeasibleSpec(f"center area {c} differs from v1={spec.v1}")
    if abs(w - spec.v2) > rtol * max(spec.v2, abs(w), 1e-300) and abs(w - spec.v2) > 1e-14:
        raise InfeasibleSpec(f"wing area {w} differs from v2={spec.v2}")
    tl = trace_left(E, x0).half_width
    tr = trace_right(E, x0).half_width if x0 < E.r0 else 0.0
    if tl < spec.h1 - rtol * max(1.0, spec.h1):
        raise InfeasibleSpec(f"left trace {tl} does not contain [-{spec.h1}, {spec.h1}]")
    if tr < spec.h2 - rtol * max(1.0, spec.h2):
        raise InfeasibleSpec(f"right trace {tr} does not contain [-{spec.h2}, {spec.h2}]")


def regularize(E: ProfileSet, x0: float, spec: PartitionSpec, density: int = 4) -> tuple[ProfileSet, float]:
    """Glue, reflect, convexify and re-cut; returns the new set and its partitioning point."""
    x0 = float(x0)
    if not (0.0 < x0 < E.r0):
        raise DomainError(f"x0={x0} outside (0, r0={E.r0})")
    check_membership(E, x0, spec)
    alpha = E.alpha

    E1, x1 = glue_holes(E, x0)
    q = trace_left(E1, x1).half_width
    E2 = reflect_above_trace(E1, x1, q)
    E3 = convexify_center(E2, x1, density)

    # re-cut the enlarged center so that its area is v1 again; the wings slide inward
    E3, (cx, cf), (wx, wf) = _center_and_wings(E3, x1)
    xt = _cut_at_area(cx, cf, 0.25 * spec.v1)
    cx, cf = _truncate(cx, cf, xt)
    wx = xt + (wx - x1)
    has_wings = len(wx) > 1 and spec.v2 > 0
    if not has_wings:
        return ProfileSet(alpha, cx, cf, jump_x0=xt), xt
    E4 = _join(alpha, (cx, cf), (wx, wf), xt)

    E5 = convexify_wings(E4, xt, density)
    _, center, (wx, wf) = _center_and_wings(E5, xt)
    r = _cut_at_area(wx, wf, 0.25 * spec.v2)
    wx, wf = _truncate(wx, wf, r)
    return _join(alpha, center, (wx, wf), xt), xt


def is_concave(xs: np.ndarray, fs: np.ndarray, tol: float = 1e-9) -> bool:
    """Concavity of a piecewise-linear graph (slopes non-increasing)."""
    dx = np.diff(xs)
    keep = dx > 0
    s = np.diff(fs)[keep] / dx[keep]
    return bool(np.all(np.diff(s) <= tol * max(1.0, float(np.max(np.abs(s), initial=0.0)))))


def center_samples(E: ProfileSet, x0: float) -> tuple[np.ndarray, np.ndarray]:
    _, c, _ = _center_and_wings(E, x0)
    return c


def wing_samples(E: ProfileSet, x0: float) -> tuple[np.ndarray, np.ndarray]:
    _, _, w = _center_and_wings(E, x0)
    return w


def hull_in_psi_plane(E: ProfileSet, x0: float, density: int = 4) -> tuple[np.ndarray, np.ndarray]:
    """Vertices of the Psi-plane upper hull of the center (for figure data)."""
    _, (cx, cf), _ = _center_and_wings(E, x0)
    rx, rf = refine(cx, cf, density)
    xi = psi_x(E.alpha, rx)
    hx, hy = upper_hull(np.concatenate((-xi[::-1], xi)), np.concatenate((rf[::-1], rf)))
    keep = hx >= 0
    return hx[keep], hy[keep]


__all__ = [
    "PsiPoint", "psi_map", "phi_map", "psi_x", "phi_xi", "mu_weight", "mu_measure", "mu_area",
    "psi_image", "refine", "upper_hull", "glue_holes", "reflect_above_trace", "convexify_center",
    "convexify_wings", "regularize", "check_membership", "is_concave", "center_samples",
    "wing_samples", "hull_in_psi_plane",
]
