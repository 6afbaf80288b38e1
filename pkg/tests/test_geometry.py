import math

import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from grushin_partition import geometry as geo
from grushin_partition import special as sp
from grushin_partition.errors import DomainError
from grushin_partition.generators import random_profile


def disc(n=2000, radius=1.0):
    th = np.linspace(0, 0.5 * math.pi, n + 1)
    return geo.ProfileSet(0.0, radius * np.sin(th), radius * np.cos(th))


def iso_profile(alpha, n=2000):
    xs = np.sin(np.linspace(0, 0.5 * math.pi, n + 1))
    xs[-1] = 1.0
    return geo.ProfileSet.from_function(alpha, lambda x: sp.phi_alpha(alpha, min(x, 1.0)), xs)


RECT2 = geo.ProfileSet(0.0, [0.0, 2.0], [1.0, 1.0])


class TestProfileSet:
    def test_validation(self):
        with pytest.raises(DomainError):
            geo.ProfileSet(0, [0.1, 1], [1, 1])
        with pytest.raises(DomainError):
            geo.ProfileSet(0, [0, 1, 0.5], [1, 1, 1])
        with pytest.raises(DomainError):
            geo.ProfileSet(0, [0, 1], [1, -1])
        with pytest.raises(DomainError):
            geo.ProfileSet(0, [0, 0, 1], [1, 2, 2])
        with pytest.raises(DomainError):
            geo.ProfileSet(0, [0, 1], [1, float("nan")])
        with pytest.raises(DomainError):
            geo.ProfileSet(0, [0, 1, 2], [1, 1, 1], jump_x0=1.5)

    def test_immutable(self):
        with pytest.raises(ValueError):
            RECT2.xs[0] = 1.0

    def test_limits(self):
        E = geo.ProfileSet(0, [0, 1, 1, 2], [1, 1, 0.3, 0.3], jump_x0=1.0)
        assert E.limit_left(1.0) == 1.0 and E.limit_right(1.0) == 0.3
        assert E.limit_right(2.0) == 0.0 and E.limit_left(2.0) == 0.3
        assert E.value(0.5) == 1.0
        assert E.left_value == 1.0 and E.right_value == 0.3

    def test_with_node_keeps_set(self):
        E = disc(50)
        F = E.with_node(0.3337)
        assert geo.area(F) == pytest.approx(geo.area(E), rel=1e-14)
        assert F.with_node(0.3337) is F


class TestArea:
    def test_disc(self):
        assert geo.area(disc()) == pytest.approx(math.pi, abs=2e-4)

    def test_iso1(self):
        assert geo.area(iso_profile(1.0)) == pytest.approx(8 / 3, abs=1e-5)

    def test_rectangle(self):
        assert geo.area(RECT2) == 8.0

    def test_pieces_add_up(self):
        E = disc(200)
        assert geo.center_area(E, 0.4) + geo.wing_area(E, 0.4) == pytest.approx(geo.area(E), rel=1e-14)


class TestPerimeter:
    def test_disc(self):
        assert geo.alpha_perimeter(disc()) == pytest.approx(2 * math.pi, abs=1e-3)

    def test_iso1(self):
        assert geo.alpha_perimeter(iso_profile(1.0)) == pytest.approx(4.0, abs=1e-5)

    def test_rectangles(self):
        assert geo.alpha_perimeter(geo.ProfileSet(0, [0, 1], [1, 1])) == pytest.approx(8.0, abs=1e-14)
        assert geo.alpha_perimeter(RECT2) == pytest.approx(12.0, abs=1e-14)

    def test_cut_examples(self):
        lam = 1.25
        th = np.linspace(0, 0.5 * math.pi, 4001)
        E = geo.ProfileSet(0, lam * np.sin(th), lam * np.cos(th)).with_node(0.75)
        assert geo.cut_perimeter(E, 0.75) == pytest.approx(4 * (lam * math.asin(0.6) + 1), abs=1e-6)
        assert geo.cut_perimeter(RECT2.with_node(0.5), 0.5) == pytest.approx(6.0, abs=1e-14)

    @pytest.mark.parametrize("alpha", (0.0, 1.0))
    def test_cut_full_set(self, alpha):
        E = iso_profile(alpha)
        assert geo.cut_perimeter(E, 1.0) == pytest.approx(sp.iso_perimeter(alpha), abs=1e-5)

    def test_cluster_rectangle(self):
        assert geo.cluster_perimeter(RECT2.with_node(1.0), 1.0) == pytest.approx(16.0, abs=1e-14)

    def test_cluster_without_walls(self):
        E = geo.ProfileSet(0, [0, 1, 2, 3], [1, 0, 0, 1])
        assert geo.cluster_perimeter(E, 1.5) == pytest.approx(geo.alpha_perimeter(E), abs=1e-14)

    def test_disc_rate_is_quadratic(self):
        ns = (250, 500, 1000, 2000)
        errs = [abs(geo.alpha_perimeter(disc(n)) - 2 * math.pi) for n in ns]
        rate = np.polyfit(np.log(ns), np.log(errs), 1)[0]
        assert rate == pytest.approx(-2.0, abs=0.1)

    def test_refinement_area_change_quadratic(self):
        def f(x):
            return math.exp(-x) * (1.5 + math.cos(3 * x))
        ns = (250, 500, 1000, 2000)
        diffs = []
        for n in ns:
            coarse = geo.ProfileSet.from_function(0, f, np.linspace(0, 2, n + 1))
            fine = geo.ProfileSet.from_function(0, f, np.linspace(0, 2, 2 * n + 1))
            diffs.append(abs(geo.area(fine) - geo.area(coarse)))
        assert np.polyfit(np.log(ns), np.log(diffs), 1)[0] <= -1.9

    def test_alpha_zero_is_euclidean(self):
        E = geo.ProfileSet(0, [0, 0.5, 1.5], [2, 1, 0.5])
        euclid = 4 * (math.hypot(0.5, 1) + math.hypot(1, 0.5) + 0.5)
        assert geo.alpha_perimeter(E) == pytest.approx(euclid, abs=1e-14)


class TestRandomProperties:
    @pytest.mark.parametrize("seed", range(50))
    def test_scaling_laws(self, seed):
        rng = np.random.default_rng(seed)
        alpha = float(rng.choice([0.0, 0.5, 1.0, 2.0]))
        E = random_profile(rng, alpha)
        lam = float(np.exp(rng.uniform(math.log(0.1), math.log(10))))
        D = geo.dilate(E, lam)
        Q = alpha + 2
        assert abs(geo.area(D) - lam ** Q * geo.area(E)) <= 1e-9 * lam ** Q * geo.area(E)
        P = geo.alpha_perimeter(E)
        assert abs(geo.alpha_perimeter(D) - lam ** (Q - 1) * P) <= 1e-9 * lam ** (Q - 1) * P

    @pytest.mark.parametrize("seed", range(50))
    def test_cluster_bounds_perimeter(self, seed):
        rng = np.random.default_rng(1000 + seed)
        alpha = float(rng.choice([0.0, 0.5, 1.0, 2.0]))
        E = random_profile(rng, alpha)
        x0 = float(rng.uniform(0.05, 0.95)) * E.r0
        assert geo.cluster_perimeter(E, x0) >= geo.alpha_perimeter(E) - 1e-12

    @settings(max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow])
    @given(st.integers(0, 10 ** 6), st.floats(0.05, 0.95))
    def test_continuous_trace_gap(self, seed, frac):
        rng = np.random.default_rng(seed)
        E = random_profile(rng, float(rng.choice([0.0, 0.5, 1.0, 2.0])), kind="sawtooth")
        x0 = frac * E.r0
        h = E.limit_left(x0)
        assert h == E.limit_right(x0)
        gap = geo.cluster_perimeter(E, x0) - geo.alpha_perimeter(E)
        assert gap == pytest.approx(4 * h, abs=1e-9)


class TestTracesAndDilation:
    def test_disc_traces(self):
        E = disc(4000).with_node(0.6)
        assert geo.trace_left(E, 0.6).half_width == pytest.approx(0.8, abs=1e-6)
        assert geo.trace_right(E, 0.6).half_width == pytest.approx(0.8, abs=1e-6)
        assert geo.trace_right(E, 1.0).half_width == 0.0

    def test_stored_jump(self):
        E = geo.ProfileSet(0, [0, 1, 1, 2], [1, 1, 0.3, 0.3], jump_x0=1.0)
        assert geo.trace_left(E, 1.0).half_width == 1.0
        assert geo.trace_right(E, 1.0).half_width == 0.3
        assert geo.trace_left(E, 1.0).contains(0.9) and not geo.trace_right(E, 1.0).contains(0.9)

    def test_dilate_examples(self):
        E0 = disc()
        D0 = geo.dilate(E0, 2)
        assert geo.area(D0) == pytest.approx(4 * geo.area(E0), rel=1e-12)
        assert geo.alpha_perimeter(D0) == pytest.approx(2 * geo.alpha_perimeter(E0), rel=1e-12)
        E1 = iso_profile(1.0, 500)
        D1 = geo.dilate(E1, 2)
        assert geo.area(D1) == pytest.approx(8 * geo.area(E1), rel=1e-12)
        assert geo.alpha_perimeter(D1) == pytest.approx(4 * geo.alpha_perimeter(E1), rel=1e-12)
        assert geo.dilate(E1, 1) == E1

    def test_translation(self):
        assert geo.translate_vertical(RECT2, 0) is RECT2
        with pytest.raises(DomainError):
            geo.translate_vertical(RECT2, 0.1)
        with pytest.raises(DomainError):
            geo.dilate(RECT2, -1)


class TestSerialization:
    @pytest.mark.parametrize("seed", range(10))
    def test_round_trip(self, tmp_path, seed):
        rng = np.random.default_rng(seed)
        E = random_profile(rng, float(rng.choice([0.0, 0.5, 1.0, 2.0])))
        x0 = float(E.xs[len(E.xs) // 2])
        if 0 < x0:
            E = E.replace(jump_x0=x0)
        p = geo.write_profile(E, tmp_path / "e.csv")
        assert geo.read_profile(p) == E

    def test_format(self, tmp_path):
        p = geo.write_profile(geo.ProfileSet(1.0, [0, 1 / 3], [0.1, 0.2]), tmp_path / "e.csv")
        raw = p.read_bytes()
        assert raw.startswith(b"x,f\n") and b"\r" not in raw
        assert b"0.33333333333333331" in raw

    def test_missing_alpha(self, tmp_path):
        p = tmp_path / "bare.csv"
        p.write_text("x,f\n0,1\n1,1\n")
        with pytest.raises(DomainError):
            geo.read_profile(p)
        assert geo.read_profile(p, alpha=0.5).alpha == 0.5
