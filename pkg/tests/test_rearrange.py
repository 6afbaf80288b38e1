import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from grushin_partition import analytic as an
from grushin_partition import geometry as geo
from grushin_partition import rearrange as rr
from grushin_partition.errors import DegenerateInput, DomainError, InfeasibleSpec
from grushin_partition.generators import random_feasible, random_profile
from grushin_partition.suites import profile_distance

ALPHAS = (0.0, 0.5, 1.0, 2.0)
STEP = ([0, 1, 1, 2, 2, 3], [1, 1, 0, 0, 1, 1])


def xi_concave(E, x0):
    cx, cf = rr.center_samples(E, x0)
    xi = rr.psi_x(E.alpha, cx)
    first_slope_ok = len(cf) < 2 or cf[1] <= cf[0] + 1e-12
    return rr.is_concave(xi, cf, 1e-9) and first_slope_ok


class TestMaps:
    def test_examples(self):
        assert rr.psi_map(1, (2, 3)) == rr.PsiPoint(2.0, 3.0)
        assert rr.mu_measure(1, (0, 1, 0, 1)) == pytest.approx(math.sqrt(2), abs=1e-10)
        assert rr.mu_measure(0, (0, 2, 0, 3)) == pytest.approx(6.0, abs=1e-12)
        assert rr.psi_map(0, (-1.5, 2)) == rr.PsiPoint(-1.5, 2.0)

    def test_odd_in_x(self):
        for a in ALPHAS:
            assert rr.psi_map(a, (-0.7, 1)).xi == -rr.psi_map(a, (0.7, 1)).xi

    @settings(max_examples=250, deadline=None)
    @given(st.sampled_from(ALPHAS), st.floats(-5, 5), st.floats(-5, 5))
    def test_round_trip(self, alpha, x, y):
        bx, by = rr.phi_map(alpha, rr.psi_map(alpha, (x, y)))
        assert abs(bx - x) <= 1e-12 and abs(by - y) <= 1e-12

    def test_round_trip_bulk(self):
        rng = np.random.default_rng(0)
        for a in ALPHAS:
            x = rng.uniform(-5, 5, 1000)
            assert np.max(np.abs(rr.phi_xi(a, rr.psi_x(a, x)) - x)) <= 1e-12

    def test_mu_area_of_rectangle(self):
        R = geo.ProfileSet(0.0, [0, 1], [2.0, 2.0])
        for a in ALPHAS:
            assert rr.mu_area(R, a) == pytest.approx(4 * rr.mu_measure(a, (0, 1, 0, 2)), rel=1e-10)

    @pytest.mark.parametrize("seed", range(10))
    def test_correspondences(self, seed):
        rng = np.random.default_rng(seed)
        E = random_profile(rng, float(rng.choice(ALPHAS)))
        F = rr.psi_image(E, density=4096)
        assert abs(geo.area(E) - rr.mu_area(F, E.alpha)) <= 1e-6
        assert abs(geo.alpha_perimeter(E) - geo.alpha_perimeter(F)) <= 1e-6
        assert F.alpha == 0.0


class TestHull:
    def test_upper_hull(self):
        hx, hy = rr.upper_hull(np.array([0, 1, 2, 3]), np.array([0, 2, 1, 0]))
        assert list(hx) == [0, 1, 3] and list(hy) == [0, 2, 0]

    def test_duplicates_use_maximum(self):
        hx, hy = rr.upper_hull(np.array([0, 1, 1, 2]), np.array([0, 1, 3, 0]))
        assert list(hy) == [0, 3, 0]


class TestGlue:
    @pytest.mark.parametrize("alpha", (0.0, 1.0))
    def test_step_example(self, alpha):
        E = geo.ProfileSet(alpha, *STEP)
        G, x1 = rr.glue_holes(E, 2.5)
        assert x1 == 1.5
        assert G.r0 == 2.0
        assert np.all(G.fs == 1.0)
        assert geo.area(G) == pytest.approx(geo.area(E), abs=1e-14) == 8.0
        assert geo.alpha_perimeter(G) < geo.alpha_perimeter(E)

    def test_euclidean_perimeter_values(self):
        E = geo.ProfileSet(0.0, *STEP)
        G, _ = rr.glue_holes(E, 2.5)
        assert geo.alpha_perimeter(E) == pytest.approx(20.0)
        assert geo.alpha_perimeter(G) == pytest.approx(12.0)

    def test_no_holes_unchanged(self):
        E = geo.ProfileSet(1.0, [0, 1, 2], [2, 1.5, 1])
        G, x1 = rr.glue_holes(E, 1.0)
        assert x1 == 1.0 and G.replace(jump_x0=None) == E

    def test_hole_at_origin(self):
        E = geo.ProfileSet(0.0, [0, 1, 1, 2], [0, 0, 1, 1])
        G, x1 = rr.glue_holes(E, 1.5)
        assert x1 == pytest.approx(0.5) and geo.area(G) == pytest.approx(geo.area(E))

    def test_errors(self):
        E = geo.ProfileSet(0.0, *STEP)
        with pytest.raises(DomainError):
            rr.glue_holes(E, 3.0)


class TestReflect:
    E = geo.ProfileSet(0.0, [0, 0.5, 0.5, 1, 1, 2, 3], [2, 2, 0.5, 0.5, 1, 1, 1], jump_x0=2.0)

    def test_example(self):
        R = rr.reflect_above_trace(self.E, 2.0, 1.0)
        assert R.value(0.75) == pytest.approx(1.5)
        assert R.value(0.25) == 2.0 and R.value(2.5) == 1.0

    def test_above_level_unchanged(self):
        E = geo.ProfileSet(0.0, [0, 1, 2, 3], [2, 1.5, 1, 1], jump_x0=2.0)
        R = rr.reflect_above_trace(E, 2.0, 1.0)
        assert profile_distance(R, E) == 0.0

    def test_trace_mismatch(self):
        with pytest.raises(DomainError):
            rr.reflect_above_trace(self.E, 2.0, 0.4)

    @pytest.mark.parametrize("seed", range(10))
    def test_random_dips_alpha1(self, seed):
        rng = np.random.default_rng(seed)
        E, x0, spec = random_feasible(rng, 1.0, kind="sawtooth")
        E, x0 = rr.glue_holes(E, x0)  # a hole has no boundary until it is reflected
        q = geo.trace_left(E, x0).half_width
        R = rr.reflect_above_trace(E, x0, q)
        assert geo.cut_perimeter(R, x0) <= geo.cut_perimeter(E, x0) + 1e-12
        assert geo.center_area(R, x0) >= geo.center_area(E, x0) - 1e-12


class TestConvexify:
    @pytest.mark.parametrize("alpha", (0.0, 1.0))
    def test_convex_cap_unchanged(self, alpha):
        sol = an.solve_closed_form(alpha, 4.0 if alpha else 3.5109409649790138, 1.0)
        E = an.sample_profile(sol, 200)
        C = rr.convexify_center(E, sol.x0)
        if alpha == 0:
            assert profile_distance(C, E) <= 1e-12
        else:
            assert profile_distance(C, E) <= 1e-4

    @pytest.mark.parametrize("alpha", (0.0, 1.0))
    def test_sawtooth(self, alpha):
        xs = np.linspace(0, 1, 11)
        fs = 2 - xs + 0.3 * (np.arange(11) % 2)
        E = geo.ProfileSet(alpha, xs, fs, jump_x0=1.0)
        C = rr.convexify_center(E, 1.0)
        assert geo.alpha_perimeter(C) < geo.alpha_perimeter(E)
        assert xi_concave(C, 1.0)
        if alpha == 0:
            # the upper concave envelope touches every raised tooth
            for x, f in zip(xs[1::2], fs[1::2]):
                assert C.value(x) == pytest.approx(f, abs=1e-12)

    def test_zero_center(self):
        E = geo.ProfileSet(0.0, [0, 1, 1, 2], [0, 0, 1, 1])
        with pytest.raises(DegenerateInput):
            rr.convexify_center(E, 1.0)


class TestRegularize:
    @pytest.mark.parametrize("alpha", (0.0, 1.0))
    def test_regular_input_is_fixed(self, alpha):
        sol = an.solve_closed_form(alpha, 4.0, 1.0)
        E = an.sample_profile(sol, 200)
        wings = geo.ProfileSet(alpha, np.append(E.xs, [sol.x0, sol.x0 + 0.5]), np.append(E.fs, [0.5, 0.4]),
                               jump_x0=sol.x0)
        spec = geo.PartitionSpec(alpha, geo.center_area(wings, sol.x0), geo.wing_area(wings, sol.x0),
                                 1.0, 0.4)
        F, xt = rr.regularize(wings, sol.x0, spec)
        assert xt == pytest.approx(sol.x0, abs=1e-9)
        assert profile_distance(F, wings) <= 1e-3

    @pytest.mark.parametrize("seed", range(10))
    def test_sawtooth_strictly_decreases(self, seed):
        rng = np.random.default_rng(seed)
        E, x0, spec = random_feasible(rng, float(rng.choice(ALPHAS)), kind="sawtooth")
        F, xt = rr.regularize(E, x0, spec)
        assert geo.cluster_perimeter(F, xt) < geo.cluster_perimeter(E, x0) - 1e-6

    @pytest.mark.parametrize("alpha", ALPHAS)
    def test_random_inputs(self, alpha):
        rng = np.random.default_rng(int(alpha * 10) + 7)
        for _ in range(50):
            E, x0, spec = random_feasible(rng, alpha)
            F, xt = rr.regularize(E, x0, spec)
            assert geo.cluster_perimeter(F, xt) <= geo.cluster_perimeter(E, x0) + 1e-9
            assert geo.center_area(F, xt) == pytest.approx(spec.v1, rel=1e-9)
            assert geo.wing_area(F, xt) == pytest.approx(spec.v2, rel=1e-9)
            assert geo.trace_left(F, xt).contains(spec.h1)
            assert geo.trace_right(F, xt).contains(spec.h2)
            assert xi_concave(F, xt)
            assert not rr._holes(F.xs, F.fs)

    def test_membership_checked(self):
        E = geo.ProfileSet(0.0, *STEP)
        with pytest.raises(InfeasibleSpec):
            rr.regularize(E, 2.5, geo.PartitionSpec(0.0, 1.0, 1.0))


class TestIdempotence:
    @pytest.mark.parametrize("seed", range(10))
    def test_steps(self, seed):
        rng = np.random.default_rng(seed)
        E, x0, _ = random_feasible(rng, float(rng.choice(ALPHAS)))
        G, x1 = rr.glue_holes(E, x0)
        G2, x2 = rr.glue_holes(G, x1)
        assert x2 == x1 and profile_distance(G, G2) <= 1e-12
        q = geo.trace_left(G, x1).half_width
        R = rr.reflect_above_trace(G, x1, q)
        assert profile_distance(R, rr.reflect_above_trace(R, x1, q)) <= 1e-12
        C = rr.convexify_center(R, x1)
        assert profile_distance(C, rr.convexify_center(C, x1)) <= 1e-12

    @pytest.mark.parametrize("seed", range(5))
    def test_wings_converge_with_density(self, seed):
        rng = np.random.default_rng(seed)
        E, x0, _ = random_feasible(rng, float(rng.choice((0.5, 1.0, 2.0))))
        changes = []
        for dens in (4, 16, 64):
            W = rr.convexify_wings(E, x0, dens)
            changes.append(profile_distance(W, rr.convexify_wings(W, x0, dens)))
        assert changes[2] <= 1e-4
        assert changes[2] <= changes[0] / 16 + 1e-12
