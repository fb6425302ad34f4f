"""Tests for convex domains: the complex-structure map, nearest-point
projection, tangent hyperplanes, strictness probes, and the gallery."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import interior_points
from koba.domains import (
    BoundaryPoint,
    ConvexDomain,
    as_real_point,
    ball,
    boundary_project,
    boundary_samples,
    c_strict_probe,
    complex_hyperplane_distance,
    complex_tangent_hyperplane,
    ellipsoid,
    graph_domain,
    multiply_by_i,
    parse_domain,
    profile_domain,
    to_complex,
    to_real,
)
from koba.errors import EvaluationDomainError
from koba.moduli import LinearModulus, LogFamilyModulus, empirical_modulus


# ---------------------------------------------------------------------------
# multiplication by i
# ---------------------------------------------------------------------------


class TestMultiplyByI:
    def test_basic_rotation(self):
        assert np.allclose(multiply_by_i([1.0, 0.0]), [0.0, 1.0])

    def test_orthogonality_example(self):
        v = np.array([3.0, 4.0])
        jv = multiply_by_i(v)
        assert np.allclose(jv, [-4.0, 3.0])
        assert np.dot(jv, v) == 0.0

    def test_odd_length_rejected(self):
        with pytest.raises(ValueError):
            multiply_by_i([1.0, 2.0, 3.0])

    @given(st.lists(st.floats(-10, 10), min_size=2, max_size=8).filter(lambda v: len(v) % 2 == 0))
    @settings(max_examples=50, deadline=None)
    def test_involution_and_orthogonality(self, v):
        v = np.asarray(v)
        assert np.allclose(multiply_by_i(multiply_by_i(v)), -v)
        assert abs(np.dot(multiply_by_i(v), v)) < 1e-12

    def test_matches_complex_multiplication(self):
        z = np.array([1.0 + 2.0j, -0.5 + 0.25j])
        assert np.allclose(multiply_by_i(to_real(z)), to_real(1j * z))


def test_real_complex_roundtrip():
    z = np.array([0.3 - 1j, 2.5 + 0.125j, -1j])
    assert np.allclose(to_complex(to_real(z)), z)
    assert np.allclose(as_real_point(z), to_real(z))
    assert np.allclose(as_real_point([1.0, 2.0]), [1.0, 2.0])


# ---------------------------------------------------------------------------
# nearest-point projection
# ---------------------------------------------------------------------------


class TestBoundaryProject:
    def test_ball2_radial(self, ball2):
        bp, delta = boundary_project(ball2, np.array([0.5, 0.0, 0.0, 0.0]))
        assert delta == pytest.approx(0.5, abs=1e-8)
        assert np.allclose(bp.xi, [1.0, 0.0, 0.0, 0.0], atol=1e-7)
        assert np.allclose(bp.inward_normal, [-1.0, 0.0, 0.0, 0.0], atol=1e-7)

    def test_center_tie_break(self, ball2):
        bp, delta = boundary_project(ball2, np.zeros(4))
        assert delta == pytest.approx(1.0, abs=1e-9)
        # all directions tie; the lexicographically smallest wins
        assert np.allclose(bp.xi, [-1.0, 0.0, 0.0, 0.0], atol=1e-9)

    def test_ellipsoid_against_dense_ray_oracle(self, ellipsoid21):
        z = np.array([1.0, 0.0, 0.0, 0.0])
        bp, delta = boundary_project(ellipsoid21, z)
        # oracle: 1e5-direction ray cast with per-ray bisection
        rng = np.random.default_rng(99)
        dirs = rng.standard_normal((100_000, 4))
        dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
        lo = np.zeros(len(dirs))
        hi = np.full(len(dirs), 3.5)
        for _ in range(48):
            mid = 0.5 * (lo + hi)
            inside = ellipsoid21.rho(z + mid[:, None] * dirs) < 0
            lo, hi = np.where(inside, mid, lo), np.where(inside, hi, mid)
        oracle = lo.min()
        # closed form for this configuration: sqrt(2/3)
        assert oracle == pytest.approx(math.sqrt(2.0 / 3.0), abs=1e-3)
        assert delta == pytest.approx(math.sqrt(2.0 / 3.0), abs=1e-4)
        assert abs(delta - oracle) < 1e-3

    def test_ball_distance_formula(self, ball2):
        for z in interior_points(ball2, 100, seed=5):
            _, delta = boundary_project(ball2, z)
            assert abs(delta - (1.0 - np.linalg.norm(z))) <= 1e-7

    def test_outside_point_rejected(self, ball2):
        with pytest.raises(EvaluationDomainError):
            boundary_project(ball2, np.array([2.0, 0.0, 0.0, 0.0]))

    def test_alignment_certificate(self, ellipsoid21):
        z = np.array([0.3, -0.4, 0.2, 0.1])
        bp, delta = boundary_project(ellipsoid21, z)
        assert bp.alignment_residual <= 1e-4
        outward = -bp.inward_normal
        cosang = np.dot(bp.xi - z, outward) / np.linalg.norm(bp.xi - z)
        assert cosang >= math.cos(1e-4)


# ---------------------------------------------------------------------------
# tangent hyperplanes
# ---------------------------------------------------------------------------


class TestComplexTangent:
    def test_ball2_at_east_pole(self, ball2):
        bp, _ = boundary_project(ball2, np.array([0.5, 0.0, 0.0, 0.0]))
        hp = complex_tangent_hyperplane(ball2, bp)
        # the hyperplane is {(1, w)}: its frame spans the second coordinate
        assert hp.frame.shape == (1, 2)
        assert abs(hp.frame[0, 0]) < 1e-7
        assert abs(abs(hp.frame[0, 1]) - 1.0) < 1e-12
        # points (1, w) are at distance 0
        w = to_real(np.array([1.0 + 0j, 0.3 - 0.2j]))
        assert complex_hyperplane_distance(w, hp.xi, hp.normal) < 1e-7

    def test_disc_degenerates_to_point(self, disc):
        bp, _ = boundary_project(disc, np.array([0.5, 0.0]))
        hp = complex_tangent_hyperplane(disc, bp)
        assert hp.frame.shape == (0, 1)
        # distance to the "hyperplane" is distance to the point xi
        z = np.array([0.2, 0.1])
        assert complex_hyperplane_distance(z, hp.xi, hp.normal) == pytest.approx(
            np.linalg.norm(z - hp.xi), rel=1e-12
        )

    def test_normal_orthogonal_to_frame(self, ellipsoid21):
        for z in interior_points(ellipsoid21, 10, seed=3):
            bp, _ = boundary_project(ellipsoid21, z)
            eta = to_complex(bp.inward_normal)
            for u in bp.tangent_frame:
                assert abs(np.sum(u * np.conj(eta))) < 1e-8


# ---------------------------------------------------------------------------
# complex strict convexity probe
# ---------------------------------------------------------------------------


class TestCStrictProbe:
    def test_ball_margin_closed_form(self, ball2):
        bp = ball2.marked_boundary()
        d = 0.2
        probes = c_strict_probe(ball2, bp, [d], samples_per_radius=64)
        # points (1, w) with |w| = d have norm sqrt(1 + d^2)
        assert probes[0][1] == pytest.approx(math.sqrt(1.0 + d * d) - 1.0, abs=1e-9)
        assert probes[0][1] > 0.0

    def test_polydisc_flat_direction(self):
        def rho(x):
            x = np.asarray(x, dtype=float)
            m1 = np.hypot(x[..., 0], x[..., 1])
            m2 = np.hypot(x[..., 2], x[..., 3])
            return np.maximum(m1, m2) - 1.0

        poly = ConvexDomain(
            n=2, rho=rho, bounding_radius=math.sqrt(2.0), tag="polydisc"
        )
        bp = BoundaryPoint(
            xi=np.array([1.0, 0.0, 0.0, 0.0]),
            inward_normal=np.array([-1.0, 0.0, 0.0, 0.0]),
            tangent_frame=np.array([[0.0, 1.0]], dtype=complex),
        )
        probes = c_strict_probe(poly, bp, [0.25, 0.5, 0.9], samples_per_radius=32)
        for _, margin in probes:
            assert abs(margin) < 1e-9  # (1, w) stays in the closure: not strict

    def test_margins_vanish_at_zero(self, ellipsoid21):
        bp = ellipsoid21.marked_boundary()
        radii = [0.2, 0.05, 0.01, 0.002]
        probes = c_strict_probe(ellipsoid21, bp, radii, samples_per_radius=32)
        margins = [m for _, m in probes]
        assert all(m > 0.0 for m in margins)
        assert margins[-1] < margins[0]
        assert margins[-1] < 1e-4

    def test_dimension_one_vacuous(self, disc):
        bp = disc.marked_boundary()
        assert c_strict_probe(disc, bp, [0.1], samples_per_radius=8) == []


# ---------------------------------------------------------------------------
# gallery invariants
# ---------------------------------------------------------------------------


GALLERY = ["disc", "ball2", "ellipsoid21", "log_graph", "linear_profile"]


@pytest.mark.parametrize("name", GALLERY)
def test_convexity_midpoints(name, request):
    domain = request.getfixturevalue(name)
    pts = interior_points(domain, 200, seed=11)
    i = np.random.default_rng(0).integers(0, len(pts), size=(10_000, 2))
    mids = 0.5 * (pts[i[:, 0]] + pts[i[:, 1]])
    assert np.all(domain.rho(mids) < 0.0)


@pytest.mark.parametrize("name", GALLERY)
def test_boundedness(name, request):
    domain = request.getfixturevalue(name)
    pts = interior_points(domain, 500, seed=2)
    assert np.all(np.linalg.norm(pts, axis=1) <= domain.bounding_radius + 1e-9)


@pytest.mark.parametrize("name", GALLERY)
def test_inward_normal_enters_domain(name, request):
    domain = request.getfixturevalue(name)
    xis, normals = boundary_samples(domain, 40, seed=7)
    t0 = 0.01 * domain.bounding_radius
    for frac in [1.0, 0.5, 0.1]:
        probe = xis - frac * t0 * normals  # outward normals: step inside
        assert np.all(domain.rho(probe) < 0.0)


@pytest.mark.parametrize("name", GALLERY)
def test_rho_sign_convention(name, request):
    domain = request.getfixturevalue(name)
    pts = interior_points(domain, 200, seed=4)
    assert np.all(domain.rho(pts) < 0.0)
    xis, normals = boundary_samples(domain, 50, seed=8)
    outside = xis + 1e-5 * normals
    assert np.all(domain.rho(outside) > 0.0)


def test_graph_domain_normal_derivative_modulus(log_graph):
    # the normal-direction derivative of rho inherits the generating modulus
    # up to a constant factor near the marked point
    omega = LogFamilyModulus(1.0)
    bp = log_graph.marked_boundary()
    jeta = np.array([0.0, 0.0, -1.0, 0.0])  # J applied to the inward normal at 0

    def directional(p):
        return float(np.dot(log_graph.gradient(p), jeta))

    est = empirical_modulus(directional, bp.xi, 0.15, budget=300, seed=21, grid_size=48)
    ts = est.nodes[est.nodes < 0.29]
    ratios = est.eval(ts) / omega.eval(ts)
    assert np.max(ratios) < 8.0


def test_marked_points(disc, ball2, log_graph, linear_profile):
    assert np.allclose(disc.marked_boundary().xi, [1.0, 0.0], atol=1e-9)
    assert np.allclose(ball2.marked_boundary().xi, [1.0, 0.0, 0.0, 0.0], atol=1e-9)
    assert np.allclose(log_graph.marked_boundary().xi, np.zeros(4), atol=1e-9)
    assert np.allclose(linear_profile.marked_boundary().xi, np.zeros(2), atol=1e-9)
    # inward normal at the graph's marked point is +Im z_n
    assert np.allclose(
        log_graph.marked_boundary().inward_normal, [0, 0, 0, 1.0], atol=1e-5
    )


def test_parse_domain_literals():
    assert parse_domain("ball:2").tag == "ball:2"
    assert parse_domain("ellipsoid:2,1").n == 2
    assert parse_domain("profile:linear:1:1:0.25").n == 1
    assert parse_domain("graph:log:1:2").n == 2
    with pytest.raises(EvaluationDomainError):
        parse_domain("cube:3")
