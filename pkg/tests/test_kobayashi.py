"""Tests for certified distance/metric brackets, Gromov products, escape
rates, and the closed-form oracles."""

import math

import numpy as np
import pytest

from conftest import interior_points
from koba.domains import ball, ellipsoid
from koba.errors import ConditioningError, EvaluationDomainError
from koba.kobayashi import (
    BracketOptions,
    CertifiedBackend,
    OracleBackend,
    backend_for,
    distance_bracket,
    escape_constant,
    exact_oracle,
    gromov_product,
    inscribed_disc_radius,
    metric_bracket,
)

LOG2 = math.log(2.0)
FAST = BracketOptions(dense_circle=2048, disc_ladder=10)


def disc_metric(p: complex, v: complex) -> float:
    return abs(v) / (1.0 - abs(p) ** 2)


def ball_metric(z, v) -> float:
    z, v = np.asarray(z, dtype=complex), np.asarray(v, dtype=complex)
    nz2 = float(np.vdot(z, z).real)
    inner = abs(complex(np.sum(v * np.conj(z)))) ** 2
    nv2 = float(np.vdot(v, v).real)
    return math.sqrt(((1 - nz2) * nv2 + inner)) / (1 - nz2)


# ---------------------------------------------------------------------------
# inscribed discs and the metric bracket
# ---------------------------------------------------------------------------


class TestInscribedDisc:
    def test_disc_center(self, disc):
        r_lo, r_hi = inscribed_disc_radius(disc, [0.0, 0.0], [1.0, 0.0])
        assert r_lo <= 1.0 <= r_hi
        assert r_hi - r_lo <= 1e-6 * r_hi

    def test_disc_offcenter(self, disc):
        r_lo, r_hi = inscribed_disc_radius(disc, [0.5, 0.0], [1.0, 0.0])
        assert r_lo <= 0.5 <= r_hi
        assert r_hi - r_lo <= 1e-6 * r_hi

    def test_ball_tangential(self, ball2):
        # solve 0.25 + r^2 = 1
        r_lo, r_hi = inscribed_disc_radius(ball2, [0.5, 0, 0, 0], [0, 0, 1.0, 0])
        assert r_lo <= math.sqrt(3.0) / 2.0 <= r_hi
        assert r_hi - r_lo <= 1e-6 * r_hi

    def test_errors(self, disc):
        with pytest.raises(EvaluationDomainError):
            inscribed_disc_radius(disc, [1.5, 0.0], [1.0, 0.0])
        with pytest.raises(ValueError):
            inscribed_disc_radius(disc, [0.0, 0.0], [0.0, 0.0])


class TestMetricBracket:
    def test_disc_center(self, disc):
        mb = metric_bracket(disc, [0.0, 0.0], [1.0, 0.0])
        assert mb.lo <= 1.0 <= mb.hi  # Poincare value
        assert mb.lo == pytest.approx(0.5, rel=1e-5)
        assert mb.hi == pytest.approx(1.0, rel=1e-5)

    def test_disc_offcenter(self, disc):
        mb = metric_bracket(disc, [0.5, 0.0], [1.0, 0.0])
        assert mb.contains(4.0 / 3.0)
        assert mb.lo == pytest.approx(1.0, rel=1e-5)
        assert mb.hi == pytest.approx(2.0, rel=1e-5)

    def test_homogeneity(self, ball2):
        p, v = [0.2, 0.1, -0.3, 0.0], np.array([0.5, 0.0, 1.0, 0.25])
        a = metric_bracket(ball2, p, v)
        b = metric_bracket(ball2, p, 2.0 * v)
        assert b.lo == pytest.approx(2.0 * a.lo, rel=1e-12)
        assert b.hi == pytest.approx(2.0 * a.hi, rel=1e-12)

    def test_graham_sandwich_factor(self, ball2):
        rng = np.random.default_rng(8)
        for _ in range(10):
            p = interior_points(ball2, 1, seed=rng.integers(1 << 30))[0]
            v = rng.standard_normal(4)
            mb = metric_bracket(ball2, p, v, tol=1e-6)
            assert mb.hi / mb.lo == pytest.approx(2.0 * mb.r_hi / mb.r_lo, rel=1e-12)
            assert mb.hi / mb.lo <= 2.0 * (1.0 + 3e-6)

    @pytest.mark.parametrize("seed", range(4))
    def test_contains_closed_form_disc(self, disc, seed):
        rng = np.random.default_rng(seed)
        p = 0.9 * (rng.random() * np.exp(2j * math.pi * rng.random()))
        v = np.exp(2j * math.pi * rng.random())
        mb = metric_bracket(disc, [p.real, p.imag], [v.real, v.imag])
        assert mb.contains(disc_metric(p, v), slack=1e-9)

    @pytest.mark.parametrize("seed", range(4))
    def test_contains_closed_form_ball(self, ball2, seed):
        rng = np.random.default_rng(100 + seed)
        z = 0.55 * rng.standard_normal(2) + 0.55j * rng.standard_normal(2)
        z *= 0.9 / max(1.0, np.linalg.norm(z))
        v = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        from koba.domains import to_real

        mb = metric_bracket(ball2, to_real(z), to_real(v))
        assert mb.contains(ball_metric(z, v), slack=1e-9)


# ---------------------------------------------------------------------------
# distance brackets
# ---------------------------------------------------------------------------


class TestDistanceBracket:
    def test_coincident(self, disc):
        br = distance_bracket(disc, [0.3, 0.0], [0.3, 0.0])
        assert (br.lo, br.hi) == (0.0, 0.0)

    def test_disc_0_to_half(self, disc):
        br = distance_bracket(disc, [0.0, 0.0], [0.5, 0.0], FAST)
        # hyperplane {Re z = 1} gives (1/2) log 2; segment integral gives log 2
        assert br.lo >= 0.5 * LOG2 - 1e-9
        assert br.hi <= LOG2 + 1e-6
        assert br.contains(math.atanh(0.5))

    def test_ball_contains_oracle(self, ball2):
        p, q = np.zeros(4), np.array([0.5, 0.0, 0.0, 0.0])
        br = distance_bracket(ball2, p, q, FAST)
        assert br.contains(math.atanh(0.5))

    def test_exact_symmetry(self, ball2):
        p, q = np.array([0.1, -0.2, 0.3, 0.0]), np.array([-0.4, 0.0, 0.1, 0.2])
        a = distance_bracket(ball2, p, q, FAST)
        b = distance_bracket(ball2, q, p, FAST)
        assert (a.lo, a.hi) == (b.lo, b.hi)

    def test_conditioning_guard(self, disc):
        with pytest.raises(ConditioningError):
            distance_bracket(disc, [0.0, 0.0], [1.0 - 1e-12, 0.0], FAST)

    def test_outside_rejected(self, disc):
        with pytest.raises(EvaluationDomainError):
            distance_bracket(disc, [0.0, 0.0], [1.5, 0.0], FAST)

    @pytest.mark.parametrize("seed", range(12))
    def test_soundness_random_disc(self, disc, seed):
        rng = np.random.default_rng(seed)
        zs = 0.97 * np.sqrt(rng.random(2)) * np.exp(2j * math.pi * rng.random(2))
        br = distance_bracket(disc, [zs[0].real, zs[0].imag], [zs[1].real, zs[1].imag], FAST)
        assert br.contains(exact_oracle("disc", zs[0], zs[1]), slack=1e-9)

    @pytest.mark.parametrize("seed", range(8))
    def test_soundness_random_ball(self, ball2, seed):
        rng = np.random.default_rng(40 + seed)
        z = rng.standard_normal((2, 4))
        z *= (0.95 * rng.random((2, 1)) ** 0.25) / np.linalg.norm(z, axis=1, keepdims=True)
        br = distance_bracket(ball2, z[0], z[1], FAST)
        from koba.domains import to_complex

        assert br.contains(exact_oracle("ball", to_complex(z[0]), to_complex(z[1])), slack=1e-9)

    def test_monotone_under_inclusion(self, ball2):
        big = ellipsoid([2.0, 2.0])  # the ball of radius 2 contains the unit ball
        p, q = np.zeros(4), np.array([0.6, 0.0, 0.2, 0.0])
        hi_small = distance_bracket(ball2, p, q, FAST).hi
        hi_big = distance_bracket(big, p, q, FAST).hi
        assert hi_big <= hi_small + 1e-6

    def test_slice_refinement_consistent(self, ball2):
        # the slice-based upper route can never undercut the ambient lower bound
        p, q = np.array([0.0, 0.0, 0.0, 0.0]), np.array([0.8, 0.0, 0.3, 0.0])
        br = distance_bracket(ball2, p, q, FAST)
        assert br.meta["hi_disc"] >= br.lo - 1e-12
        assert br.meta["hi_segment"] >= br.lo - 1e-12


# ---------------------------------------------------------------------------
# supporting-hyperplane lower bound (exact inequality on the disc)
# ---------------------------------------------------------------------------


def test_halfplane_bound_under_oracle():
    rng = np.random.default_rng(123)
    ps, qs = 2.0 * rng.random(1000) - 1.0, 2.0 * rng.random(1000) - 1.0
    for p, q in zip(ps, qs):
        bound = 0.5 * abs(math.log((1.0 - p) / (1.0 - q)))
        oracle = exact_oracle("disc", complex(p), complex(q))
        assert bound <= oracle + 1e-12


# ---------------------------------------------------------------------------
# Gromov products
# ---------------------------------------------------------------------------


class TestGromovProduct:
    def test_base_point_product_vanishes(self, disc):
        backend = backend_for(disc, exact=True)
        o = [0.0, 0.0]
        br = gromov_product(backend, o, [0.5, 0.2], o)
        assert br.lo == 0.0
        assert br.hi <= 1e-12

    def test_same_point_is_distance(self, disc):
        backend = backend_for(disc, exact=True)
        br = gromov_product(backend, [0.9, 0.0], [0.9, 0.0], [0.0, 0.0])
        assert br.contains(math.atanh(0.9), slack=1e-12)

    def test_antipodal_cancels(self, disc):
        backend = backend_for(disc, exact=True)
        for r in [0.5, 0.9, 0.99]:
            br = gromov_product(backend, [r, 0.0], [-r, 0.0], [0.0, 0.0])
            assert br.contains(0.0, slack=1e-12)
            assert br.hi <= 1e-9

    def test_bracket_backend_contains_exact(self, disc):
        backend = CertifiedBackend(disc, FAST)
        x, y, o = [0.6, 0.0], [0.3, 0.3], [0.0, -0.2]
        br = gromov_product(backend, x, y, o)
        xo = exact_oracle("disc", complex(0.6), complex(-0.2j))
        yo = exact_oracle("disc", complex(0.3 + 0.3j), complex(-0.2j))
        xy = exact_oracle("disc", complex(0.6), complex(0.3 + 0.3j))
        assert br.contains(0.5 * (xo + yo - xy), slack=1e-9)


# ---------------------------------------------------------------------------
# escape rate
# ---------------------------------------------------------------------------


class TestEscape:
    @pytest.mark.parametrize("name", ["disc", "ball2"])
    def test_profile_window(self, name, request):
        domain = request.getfixturevalue(name)
        rep = escape_constant(
            domain, np.zeros(2 * domain.n), boundary_count=6, depth_count=5, opts=FAST
        )
        # closed form: hi(0, z) - (1/2) log(1/delta) -> (1/2) log(1 + r) -> (1/2) log 2
        assert 0.5 * LOG2 - 0.01 <= rep.C <= 0.5 * LOG2 + LOG2 + 0.01

    def test_profile_monotone_bounded(self, disc):
        rep = escape_constant(disc, [0.0, 0.0], boundary_count=4, depth_count=6, opts=FAST)
        prof = np.asarray(rep.profile)
        # the true profile increases toward (1/2) log 2; allow bracket noise
        assert np.all(np.diff(prof) >= -5e-3)
        assert np.max(prof) < 1.1


# ---------------------------------------------------------------------------
# exact oracles
# ---------------------------------------------------------------------------


class TestExactOracle:
    def test_disc_values(self):
        assert exact_oracle("disc", 0.3 + 0.3j, 0.3 + 0.3j) == 0.0
        assert exact_oracle("disc", 0j, 0.5 + 0j) == pytest.approx(
            0.5 * math.log(3.0), rel=1e-12
        )

    def test_ball_radial(self):
        val = exact_oracle("ball", np.array([0j, 0j]), np.array([0.9 + 0j, 0j]))
        assert val == pytest.approx(math.atanh(0.9), rel=1e-12)

    def test_ball_reduces_to_disc(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            p, q = 0.9 * (rng.random(2) + 1j * rng.random(2) - 0.5 - 0.5j)
            assert exact_oracle("ball", np.array([p]), np.array([q])) == pytest.approx(
                exact_oracle("disc", p, q), rel=1e-10, abs=1e-12
            )

    def test_metric_from_distance_quotient(self):
        # the closed-form ball metric matches the distance difference quotient
        # (eps large enough to dodge cancellation in 1 - ratio ~ 1 - O(eps^2))
        z = np.array([0.4 + 0.1j, -0.2j])
        v = np.array([0.3 - 0.2j, 1.0 + 0j])
        eps = 1e-5
        quotient = exact_oracle("ball", z, z + eps * v) / eps
        assert quotient == pytest.approx(ball_metric(z, v), rel=1e-3)

    def test_dimension_errors(self):
        with pytest.raises(ValueError):
            exact_oracle("ball", np.array([0j, 0j]), np.array([0j]))
        with pytest.raises(EvaluationDomainError):
            exact_oracle("disc", 1.5 + 0j, 0j)
        with pytest.raises(ValueError):
            exact_oracle("polydisc", 0j, 0j)

    def test_backend_selector(self, disc, ball2, ellipsoid21):
        assert isinstance(backend_for(disc, exact=True), OracleBackend)
        assert backend_for(ball2, exact=True).kind == "ball"
        with pytest.raises(ValueError):
            backend_for(ellipsoid21, exact=True)
        assert isinstance(backend_for(ellipsoid21), CertifiedBackend)


# ---------------------------------------------------------------------------
# two-tangent lower bound: fitted constant stabilizes
# ---------------------------------------------------------------------------


def test_two_tangent_constant_stabilizes():
    # p, q near the tangent hyperplanes at (1,0) and (-1,0) of the ball;
    # fit C in  k >= (1/2)log(1/d(p)) + (1/2)log(1/d(q)) - C  with the oracle
    fits = []
    for delta in [1e-2, 1e-3, 1e-4, 1e-5]:
        p = np.array([(1.0 - delta) + 0j, 0j])
        q = np.array([-(1.0 - delta) + 0j, 0j])
        k = exact_oracle("ball", p, q)
        fits.append(math.log(1.0 / delta) - k)
    fits = np.asarray(fits)
    # stable (differences shrink) and finite: the limit is -log 2 here
    assert np.all(np.abs(np.diff(fits)) < 0.02)
    assert abs(fits[-1] - (-LOG2)) < 1e-3
