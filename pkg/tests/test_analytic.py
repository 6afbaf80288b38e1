import dataclasses
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from grushin_partition import analytic as an
from grushin_partition import geometry as geo
from grushin_partition import special as sp
from grushin_partition.errors import DomainError, InfeasibleSpec, UnsupportedAlpha
from grushin_partition.oracle import first_integral_residual

V1_CANON0 = 3.5109409649790138

# frozen regression data (closed form, recomputed at build time)
FROZEN = {
    0: dict(v1=V1_CANON0, d=0.6, x0=0.75, lam=1.25, y=0.0, P=7.217505543966421),
    1: dict(v1=4.0, d=0.611720813735491, x0=0.8793629172951815, lam=1.437523290936148,
            y=-0.4428927446102058, beta=1.1801115207919695, P=5.726962162262343),
}


@pytest.fixture(scope="module")
def sol0():
    return an.solve_closed_form(0, V1_CANON0, 1.0)


@pytest.fixture(scope="module")
def sol1():
    return an.solve_closed_form(1, 4.0, 1.0)


class TestOdes:
    def test_center(self):
        assert an.center_ode_rhs(0, 1, 0.6) == pytest.approx(-0.75, abs=1e-14)
        assert an.center_ode_rhs(1, 0.5, 1.0) == pytest.approx(-0.5 / math.sqrt(0.75), abs=1e-14)
        for a in (0, 0.5, 1, 2):
            assert an.center_ode_rhs(a, 0.7, 0.0) == 0.0
        assert an.center_ode_rhs(0, 1, 0.6) == pytest.approx(sp.phi_alpha_prime(0, 0.6), abs=1e-14)

    def test_outer(self):
        assert an.outer_ode_rhs(0, an.OuterOdeParams(0, 0), 0.4) == 0.0
        p = an.OuterOdeParams(1, -0.5)
        assert an.outer_ode_rhs(1, p, 0.7) == pytest.approx(0.1428869017, abs=1e-9)
        assert an.outer_ode_rhs(1, p, -0.7) == pytest.approx(-an.outer_ode_rhs(1, p, 0.7), abs=1e-15)

    def test_x0_of_d(self):
        assert an.x0_of_d(0, 1, 0.6) == pytest.approx(0.75, abs=1e-15)
        assert an.x0_of_d(1, 1, 0.6) == pytest.approx(math.sqrt(0.75), abs=1e-15)
        assert an.x0_of_d(0, 1, 1e-12) < 1e-11
        with pytest.raises(DomainError):
            an.x0_of_d(0, 1, 1.0)

    def test_volume_residual(self):
        vq = 0.75 + 0.5625 * sp.G_alpha(0, 0.6)
        assert vq == pytest.approx(0.8777352, abs=1e-7)
        assert an.volume_residual(0, 1, vq, 0.6) == pytest.approx(0.0, abs=1e-14)
        assert an.volume_residual(0, 1, 0.0, 0.05) > 0
        grid = np.linspace(0.01, 0.99, 99)
        vals = [an.volume_residual(1, 1, 1.0, d) for d in grid]
        assert np.any(np.diff(np.sign(vals)) != 0)


class TestSolve:
    @pytest.mark.parametrize("alpha", (0, 1))
    def test_frozen(self, alpha):
        f = FROZEN[alpha]
        s = an.solve_closed_form(alpha, f["v1"], 1.0)
        assert s.d == pytest.approx(f["d"], abs=1e-10)
        assert s.x0 == pytest.approx(f["x0"], abs=1e-10)
        assert s.lam == pytest.approx(f["lam"], abs=1e-10)
        assert s.y_shift == pytest.approx(f["y"], abs=1e-10)
        assert an.cut_perimeter_exact(s) == pytest.approx(f["P"], abs=1e-9)
        if "beta" in f:
            assert s.beta == pytest.approx(f["beta"], abs=1e-10)

    def test_canonical_geometry(self, sol0):
        assert math.sqrt(sol0.lam ** 2 - sol0.x0 ** 2) == pytest.approx(1.0, abs=1e-10)
        assert abs(sol0.y_shift) <= 1e-10

    @pytest.mark.parametrize("alpha", (0, 1))
    def test_field_invariants(self, alpha):
        s = an.solve_closed_form(alpha, FROZEN[alpha]["v1"], 1.0)
        assert s.lam == s.x0 / s.d
        assert s.mu_l * s.lam == pytest.approx(1.0, abs=1e-15)
        assert s.beta == pytest.approx(s.h + s.x0 ** (alpha + 1) * sp.sigma_alpha(alpha, s.d), abs=1e-12)

    def test_errors(self):
        with pytest.raises(InfeasibleSpec):
            an.solve_closed_form(1, 0.0, 1.0)
        with pytest.raises(InfeasibleSpec):
            an.solve_closed_form(0, 1.0, 0.0)
        with pytest.raises(UnsupportedAlpha):
            an.solve_closed_form(0.5, 1.0, 1.0)

    def test_experimental_alpha(self):
        s = an.solve_closed_form(2, 4.0, 1.0, experimental=True)
        r = an.lagrange_residuals(s, 4.0, 1.0)
        assert max(map(abs, r)) <= 1e-8
        assert math.isfinite(an.solution_record(s)["identity_residual"])

    def test_area_round_trip(self, sol1):
        E = an.sample_profile(sol1, 4000)
        assert geo.area(E) == pytest.approx(sol1.v1, rel=1e-6)
        assert geo.trace_left(E, sol1.x0).half_width == 1.0

    def test_record(self, sol1):
        rec = an.solution_record(sol1)
        for key in ("alpha", "d", "x0", "lambda", "y_shift", "beta", "mu_l", "r1", "r2", "r3"):
            assert key in rec
        assert max(abs(rec[k]) for k in ("r1", "r2", "r3")) <= 1e-8


class TestProfile:
    def test_values(self, sol0):
        assert an.profile_eval(sol0, 0.0) == pytest.approx(sol0.beta, abs=1e-12)
        assert an.profile_eval(sol0, 0.45) == pytest.approx(math.sqrt(1.5625 - 0.2025), abs=1e-10)
        assert an.profile_eval(sol0, sol0.x0 * (1 - 1e-12)) == pytest.approx(1.0, abs=1e-9)
        assert an.profile_trace(sol0) == pytest.approx(1.0, abs=1e-10)
        with pytest.raises(DomainError):
            an.profile_eval(sol0, sol0.x0)

    @pytest.mark.parametrize("which", ("sol0", "sol1"))
    def test_first_integral(self, which, request):
        s = request.getfixturevalue(which)
        for x in np.linspace(0.02, 0.98, 20) * s.x0:
            assert an.first_integral_value(s, x) == pytest.approx(-x / s.lam, abs=1e-9)

    @pytest.mark.parametrize("which", ("sol0", "sol1"))
    def test_normal_form(self, which, request):
        s = request.getfixturevalue(which)
        h = 1e-3
        for x in np.linspace(0.1, 0.9, 9) * s.x0:
            fd = (an.profile_eval(s, x + h) - 2 * an.profile_eval(s, x) + an.profile_eval(s, x - h)) / h ** 2
            assert fd == pytest.approx(an.normal_form_rhs(s, x), abs=1e-5)

    @pytest.mark.parametrize("which", ("sol0", "sol1"))
    def test_sampled_first_integral(self, which, request):
        s = request.getfixturevalue(which)
        E = an.sample_profile(s, 400)
        assert first_integral_residual(E.xs, E.fs, s.alpha) <= 1e-3


class TestResiduals:
    def test_converged(self, sol0):
        r1, r2, r3 = an.lagrange_residuals(sol0, sol0.v1, 1.0)
        assert abs(r1) <= 1e-8 and abs(r2) <= 1e-8 and abs(r3) <= 1e-12

    def test_perturbed_d(self, sol0):
        bad = dataclasses.replace(sol0, d=sol0.d + 1e-3)
        assert abs(an.lagrange_residuals(bad, sol0.v1, 1.0)[2]) > 1e-6

    def test_mu_from_lambda(self, sol1):
        alt = dataclasses.replace(sol1, mu_l=1.0 / sol1.lam)
        assert an.lagrange_residuals(alt, 4.0, 1.0) == pytest.approx(an.lagrange_residuals(sol1, 4.0, 1.0), abs=1e-15)


V_GRID = np.linspace(0.5, 8, 10)
H_GRID = np.linspace(0.25, 4, 10)


class TestDichotomy:
    def test_alpha0_y_vanishes(self):
        for v in V_GRID:
            for h in H_GRID:
                s = an.solve_closed_form(0, v, h)
                assert abs(s.y_shift) <= 1e-10
                assert max(map(abs, an.lagrange_residuals(s, v, h))) <= 1e-8

    def test_alpha1_y_negative(self):
        for v in V_GRID:
            for h in H_GRID:
                s = an.solve_closed_form(1, v, h)
                assert s.y_shift < 0
                assert max(map(abs, an.lagrange_residuals(s, v, h))) <= 1e-8

    def test_monotone_map(self):
        for d in np.linspace(0.01, 0.99, 99):
            assert sp.phi_alpha(1, d) - d * math.sqrt(1 - d * d) > 0

    @settings(max_examples=30, deadline=None)
    @given(st.sampled_from([0.0, 1.0]), st.floats(0.5, 8), st.floats(0.25, 4), st.floats(0.2, 5))
    def test_scale_covariance(self, alpha, v, h, s):
        a = an.solve_closed_form(alpha, v, h)
        b = an.solve_closed_form(alpha, v * s ** (alpha + 2), h * s ** (alpha + 1))
        assert b.d == pytest.approx(a.d, abs=1e-9)
        assert b.x0 == pytest.approx(s * a.x0, rel=1e-9)
        assert b.lam == pytest.approx(s * a.lam, rel=1e-9)
        assert b.y_shift == pytest.approx(s ** (alpha + 1) * a.y_shift, rel=1e-9, abs=1e-9)
