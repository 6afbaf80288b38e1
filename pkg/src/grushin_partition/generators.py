"""Random feasible inputs for the property suites (seeded, deterministic)."""
from __future__ import annotations

import numpy as np

from .geometry import PartitionSpec, ProfileSet, center_area, trace_left, trace_right, wing_area

KINDS = ("step", "sawtooth", "mixed")


def random_profile(rng: np.random.Generator, alpha: float, kind: str | None = None,
                   n_cells: tuple[int, int] = (6, 18)) -> ProfileSet:
    """Random profile with walls, dips and zero intervals on a random grid."""
    kind = kind or KINDS[int(rng.integers(len(KINDS)))]
    n = int(rng.integers(n_cells[0], n_cells[1] + 1))
    radius = float(rng.uniform(0.5, 3.0))
    inner = np.sort(rng.uniform(0.0, radius, n - 1))
    nodes = np.concatenate(([0.0], inner, [radius]))
    nodes = np.unique(nodes)
    zero_p = 0.15
    xs: list[float] = []
    fs: list[float] = []
    if kind == "step":
        levels = rng.uniform(0.2, 2.0, len(nodes) - 1)
        levels[rng.random(len(levels)) < zero_p] = 0.0
        for i, v in enumerate(levels):
            xs += [nodes[i], nodes[i + 1]]
            fs += [v, v]
    else:
        vals = rng.uniform(0.0, 2.0, len(nodes))
        vals[rng.random(len(vals)) < zero_p] = 0.0
        # occasional zero runs spanning a whole cell
        for i in np.flatnonzero(rng.random(len(vals) - 1) < 0.5 * zero_p):
            vals[i] = vals[i + 1] = 0.0
        for i, x in enumerate(nodes):
            xs.append(x)
            fs.append(vals[i])
            if kind == "mixed" and 0 < i < len(nodes) - 1 and rng.random() < 0.3:
                xs.append(x)
                fs.append(float(rng.uniform(0.0, 2.0)))
    fs_arr = np.array(fs)
    if not np.any(fs_arr > 0):
        fs_arr[0] = 1.0
    return ProfileSet(alpha, np.array(xs), fs_arr)


def random_feasible(rng: np.random.Generator, alpha: float, kind: str | None = None,
                    max_tries: int = 100) -> tuple[ProfileSet, float, PartitionSpec]:
    """A random set, a partitioning point on its grid and a spec it satisfies.

    The center and the wings both have positive area; the required traces are
    random fractions of the actual ones.
    """
    for _ in range(max_tries):
        E = random_profile(rng, alpha, kind)
        cand = np.unique(E.xs[(E.xs > 0) & (E.xs < E.r0)])
        if len(cand) == 0:
            continue
        x0 = float(cand[int(rng.integers(len(cand)))])
        if rng.random() < 0.3:
            # partitioning point inside a cell rather than on a node
            j = int(np.searchsorted(E.xs, x0))
            lo = E.xs[j - 1]
            if x0 > lo:
                x0 = float(rng.uniform(lo, x0))
        E = E.with_node(x0).replace(jump_x0=x0)
        v1, v2 = center_area(E, x0), wing_area(E, x0)
        if v1 <= 1e-3 or v2 <= 1e-3:
            continue
        # v1, v2 come from the same quadrature the checks use, so membership is exact
        h1 = float(rng.uniform(0.0, 1.0)) * trace_left(E, x0).half_width
        h2 = float(rng.uniform(0.0, 1.0)) * trace_right(E, x0).half_width
        return E, x0, PartitionSpec(alpha, v1, v2, h1, h2)
    raise RuntimeError("could not draw a feasible random profile")
