"""Even-profile sets E = {(x, y): |y| < f(|x|)} and their measurements.

A profile is stored on a non-decreasing abscissa grid starting at 0.  Between
two distinct abscissae f is linear.  A repeated abscissa holds the left and
right one-sided values of a vertical wall.  Past the last abscissa r0 the
profile is zero, so a positive last sample is a terminal wall.

All perimeters are computed with the representation formula: per quadrant,
int sqrt(f'^2 + x^(2 alpha)) dx along arcs plus the heights of vertical walls.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np

from .errors import DomainError
from .special import QuadratureConfig, check_alpha, integrate

# per-cell arc quadrature; tight so that dilation scaling is reproduced to ~1e-12
_ARC_QUAD = QuadratureConfig(abs_tol=1e-300, rel_tol=1e-13, max_subdivisions=200)
_GL_X, _GL_W = np.polynomial.legendre.leggauss(20)


@dataclass(frozen=True)
class Trace:
    half_width: float

    def __post_init__(self) -> None:
        if not self.half_width >= 0:
            raise DomainError(f"trace half-width must be nonnegative, got {self.half_width}")

    def contains(self, h: float, tol: float = 0.0) -> bool:
        """True when [-h, h] is contained in the trace interval."""
        return self.half_width >= h - tol


@dataclass(frozen=True)
class PartitionSpec:
    alpha: float
    v1: float
    v2: float = 0.0
    h1: float = 0.0
    h2: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "alpha", check_alpha(self.alpha))
        for name in ("v1", "v2", "h1", "h2"):
            val = float(getattr(self, name))
            if not (math.isfinite(val) and val >= 0):
                raise DomainError(f"{name} must be a finite nonnegative real, got {val}")
            object.__setattr__(self, name, val)


def _normalize(xs: np.ndarray, fs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # keep only the first and last sample of each run of equal abscissae
    if len(xs) <= 2:
        return xs, fs
    same_prev = np.r_[False, xs[1:] == xs[:-1]]
    same_next = np.r_[xs[:-1] == xs[1:], False]
    keep = ~(same_prev & same_next)
    return xs[keep], fs[keep]


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class ProfileSet:
    """Grid-sampled even profile with an optional partitioning point."""

    alpha: float
    xs: np.ndarray
    fs: np.ndarray
    jump_x0: float | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "alpha", check_alpha(self.alpha))
        xs = np.asarray(self.xs, dtype=float).ravel()
        fs = np.asarray(self.fs, dtype=float).ravel()
        if xs.shape != fs.shape:
            raise DomainError("xs and fs must have the same length")
        if len(xs) < 2:
            raise DomainError("a profile needs at least two samples")
        if not (np.all(np.isfinite(xs)) and np.all(np.isfinite(fs))):
            raise DomainError("profile samples must be finite")
        if xs[0] != 0.0:
            raise DomainError(f"the grid must start at 0, got {xs[0]}")
        if np.any(np.diff(xs) < 0):
            raise DomainError("the grid must be non-decreasing")
        if np.any(fs < 0):
            raise DomainError("profile values must be nonnegative")
        xs, fs = _normalize(xs, fs)
        if xs[-1] == xs[-2]:
            # a wall exactly at r0 encloses no area; the boundary there is the left value
            xs, fs = xs[:-1], fs[:-1]
        if xs[1] == 0.0:
            raise DomainError("a wall at x = 0 is not representable by an even profile")
        if xs[-1] <= 0.0:
            raise DomainError("the support radius must be positive")
        object.__setattr__(self, "xs", _frozen(xs))
        object.__setattr__(self, "fs", _frozen(fs))
        if self.jump_x0 is not None:
            x0 = float(self.jump_x0)
            if not np.any(xs == x0) or x0 <= 0.0:
                raise DomainError(f"jump_x0={x0} must be a positive grid abscissa")
            object.__setattr__(self, "jump_x0", x0)

    # -- construction helpers -------------------------------------------------
    @classmethod
    def from_function(cls, alpha: float, f: Callable, xs, jump_x0: float | None = None) -> "ProfileSet":
        xs = np.asarray(xs, dtype=float)
        return cls(alpha, xs, np.array([f(x) for x in xs], dtype=float), jump_x0)

    def replace(self, **changes) -> "ProfileSet":
        kw = dict(alpha=self.alpha, xs=self.xs, fs=self.fs, jump_x0=self.jump_x0)
        kw.update(changes)
        return ProfileSet(**kw)

    def with_node(self, x: float) -> "ProfileSet":
        """Same set with an explicit grid abscissa at x (0 < x <= r0)."""
        x = float(x)
        if not (0.0 < x <= self.r0):
            raise DomainError(f"node {x} outside (0, r0]")
        if np.any(self.xs == x):
            return self
        j = int(np.searchsorted(self.xs, x))
        v = self.value(x)
        return self.replace(xs=np.insert(self.xs, j, x), fs=np.insert(self.fs, j, v))

    # -- evaluation -----------------------------------------------------------
    @property
    def r0(self) -> float:
        return float(self.xs[-1])

    @property
    def n_samples(self) -> int:
        return len(self.xs)

    def limit_left(self, x: float) -> float:
        """lim_{t -> x^-} f(t) (equal to f(0) at x = 0)."""
        return self._limit(x, left=True)

    def limit_right(self, x: float) -> float:
        """lim_{t -> x^+} f(t) (zero at and beyond r0)."""
        return self._limit(x, left=False)

    def _limit(self, x: float, left: bool) -> float:
        x = abs(float(x))
        xs, fs = self.xs, self.fs
        if x > xs[-1] or (x == xs[-1] and not left):
            return 0.0
        lo = int(np.searchsorted(xs, x, side="left"))
        hi = int(np.searchsorted(xs, x, side="right"))
        if hi > lo:  # x is a node; duplicates give the two sides of a wall
            return float(fs[lo] if left else fs[hi - 1])
        a, b = xs[lo - 1], xs[lo]
        t = (x - a) / (b - a)
        return float(fs[lo - 1] + t * (fs[lo] - fs[lo - 1]))

    def value(self, x: float) -> float:
        """Profile value, taking the left limit at walls."""
        return self.limit_left(x)

    @property
    def left_value(self) -> float | None:
        return None if self.jump_x0 is None else self.limit_left(self.jump_x0)

    @property
    def right_value(self) -> float | None:
        return None if self.jump_x0 is None else self.limit_right(self.jump_x0)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ProfileSet):
            return NotImplemented
        return (self.alpha == other.alpha and self.jump_x0 == other.jump_x0
                and np.array_equal(self.xs, other.xs) and np.array_equal(self.fs, other.fs))

    __hash__ = None  # type: ignore[assignment]


# -- piecewise-linear primitives ----------------------------------------------

def arc_lengths(alpha: float, xs: np.ndarray, fs: np.ndarray) -> np.ndarray:
    """Per-cell int sqrt(f'^2 + x^(2 alpha)) for a piecewise-linear profile.

    Zero-width cells (walls) and cells where f vanishes at both ends (holes)
    contribute nothing.
    """
    xs = np.asarray(xs, dtype=float)
    fs = np.asarray(fs, dtype=float)
    a, b = xs[:-1], xs[1:]
    dx = b - a
    df = fs[1:] - fs[:-1]
    out = np.zeros(len(dx))
    live = (dx > 0) & ~((fs[:-1] == 0) & (fs[1:] == 0))
    if alpha == 0.0:
        out[live] = np.hypot(df[live], dx[live])
        return out
    s = np.zeros_like(dx)
    s[live] = df[live] / dx[live]
    near = live & (a < dx)
    far = live & ~near
    if np.any(far):
        af, bf, sf = a[far], b[far], s[far]
        mid, half = 0.5 * (af + bf), 0.5 * (bf - af)
        xq = mid[:, None] + half[:, None] * _GL_X[None, :]
        vals = np.sqrt(sf[:, None] ** 2 + xq ** (2.0 * alpha))
        out[far] = half * (vals @ _GL_W)
    p = alpha + 1.0
    for i in np.flatnonzero(near):
        ai, bi, si = a[i], b[i], s[i]
        if si == 0.0:
            out[i] = (bi ** p - ai ** p) / p
        else:
            out[i] = integrate(lambda x: math.sqrt(si * si + x ** (2.0 * alpha)), ai, bi, _ARC_QUAD)
    return out


def _quadrant_measure(alpha: float, xs: np.ndarray, fs: np.ndarray, lo_wall: bool) -> float:
    """Per-quadrant boundary of the region over one slice: arcs, inner walls,
    the closing wall at the last abscissa and optionally the wall at the first."""
    dx = np.diff(xs)
    walls = np.abs(np.diff(fs))[dx == 0].sum()
    total = arc_lengths(alpha, xs, fs).sum() + walls + fs[-1]
    if lo_wall:
        total += fs[0]
    return float(total)


def _slice(E: ProfileSet, lo: float, hi: float) -> tuple[np.ndarray, np.ndarray]:
    """Samples of E restricted to (lo, hi), with one-sided end values."""
    xs, fs = E.xs, E.fs
    inner = (xs > lo) & (xs < hi)
    sx = np.concatenate(([lo], xs[inner], [hi]))
    sf = np.concatenate(([E.limit_right(lo) if lo > 0 else float(fs[0])], fs[inner], [E.limit_left(hi)]))
    return sx, sf


def _piece(E: ProfileSet, lo: float, hi: float) -> float:
    sx, sf = _slice(E, lo, hi)
    return _quadrant_measure(E.alpha, sx, sf, lo_wall=lo > 0)


def _trapezoid(xs: np.ndarray, fs: np.ndarray) -> float:
    return float(np.sum(np.diff(xs) * 0.5 * (fs[1:] + fs[:-1])))


# -- public measurements ---------------------------------------------------------

def area(E: ProfileSet) -> float:
    return 4.0 * _trapezoid(E.xs, E.fs)


def center_area(E: ProfileSet, x0: float) -> float:
    """Area of E ∩ {|x| < x0}."""
    x0 = float(x0)
    if x0 <= 0:
        return 0.0
    x0 = min(x0, E.r0)
    sx, sf = _slice(E, 0.0, x0)
    return 4.0 * _trapezoid(sx, sf)


def wing_area(E: ProfileSet, x0: float) -> float:
    """Area of E ∩ {|x| > x0}."""
    return area(E) - center_area(E, x0)


def alpha_perimeter(E: ProfileSet) -> float:
    return 4.0 * _quadrant_measure(E.alpha, E.xs, E.fs, lo_wall=False)


def cut_perimeter(E: ProfileSet, x0: float) -> float:
    """Perimeter of E ∩ {|x| < x0}, including the wall at |x| = x0."""
    x0 = float(x0)
    if not (0.0 < x0 <= E.r0):
        raise DomainError(f"x0={x0} outside (0, r0={E.r0}]")
    return 4.0 * _piece(E, 0.0, x0)


def wings_perimeter(E: ProfileSet, x0: float) -> float:
    """Sum of the perimeters of the two wings E ∩ {±x > x0}."""
    x0 = float(x0)
    if not (0.0 < x0 < E.r0):
        raise DomainError(f"x0={x0} outside (0, r0={E.r0})")
    return 4.0 * _piece(E, x0, E.r0)


def cluster_perimeter(E: ProfileSet, x0: float) -> float:
    """Half the sum of the perimeters of E and of its three pieces."""
    x0 = float(x0)
    if not (0.0 < x0 < E.r0):
        raise DomainError(f"x0={x0} outside (0, r0={E.r0})")
    return 0.5 * (alpha_perimeter(E) + cut_perimeter(E, x0) + wings_perimeter(E, x0))


def trace_left(E: ProfileSet, x0: float) -> Trace:
    x0 = float(x0)
    if not (0.0 < x0 <= E.r0):
        raise DomainError(f"x0={x0} outside (0, r0={E.r0}]")
    return Trace(E.limit_left(x0))


def trace_right(E: ProfileSet, x0: float) -> Trace:
    x0 = float(x0)
    if not (0.0 < x0 <= E.r0):
        raise DomainError(f"x0={x0} outside (0, r0={E.r0}]")
    return Trace(E.limit_right(x0))


def dilate(E: ProfileSet, lam: float) -> ProfileSet:
    """Anisotropic dilation (x, y) -> (lam x, lam^(alpha+1) y)."""
    lam = float(lam)
    if not (lam > 0 and math.isfinite(lam)):
        raise DomainError(f"dilation factor must be positive, got {lam}")
    x0 = None if E.jump_x0 is None else E.jump_x0 * lam
    return ProfileSet(E.alpha, E.xs * lam, E.fs * lam ** (E.alpha + 1.0), x0)


def translate_vertical(E: ProfileSet, t: float) -> ProfileSet:
    """Only the trivial translation keeps a profile set y-symmetric."""
    if t != 0:
        raise DomainError("vertical translation does not preserve y-symmetry of a profile set")
    return E


# -- serialization -------------------------------------------------------------

def sidecar_path(path: str | Path) -> Path:
    return Path(path).with_suffix(".json")


def write_profile(E: ProfileSet, path: str | Path) -> Path:
    """Write ``x,f`` CSV (17 significant digits) plus the JSON sidecar."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["x", "f"])
        for x, f in zip(E.xs, E.fs):
            w.writerow([f"{x:.17g}", f"{f:.17g}"])
    meta = {
        "alpha": E.alpha,
        "jump_x0": E.jump_x0,
        "left_value": E.left_value,
        "right_value": E.right_value,
    }
    with open(sidecar_path(path), "w", encoding="utf-8", newline="\n") as fh:
        json.dump(meta, fh, indent=2)
        fh.write("\n")
    return path


def read_profile(path: str | Path, alpha: float | None = None) -> ProfileSet:
    path = Path(path)
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or [c.strip() for c in rows[0]] != ["x", "f"]:
        raise DomainError(f"{path}: missing 'x,f' header")
    data = np.array([[float(a), float(b)] for a, b in rows[1:]], dtype=float)
    side = sidecar_path(path)
    jump = None
    if side.exists():
        meta = json.loads(side.read_text(encoding="utf-8"))
        alpha = meta["alpha"] if alpha is None else alpha
        jump = meta.get("jump_x0")
    if alpha is None:
        raise DomainError(f"{path}: no sidecar and no alpha given")
    return ProfileSet(alpha, data[:, 0], data[:, 1], jump)
