import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from abscatter.errors import (
    ConfigError,
    CurvesTooClose,
    NoIntersection,
    NonIntegerLink,
    UnsupportedTopology,
)
from abscatter.geometry import (
    BLOCKED,
    OUTSIDE,
    THROUGH_HOLE,
    Ball,
    ClosedCurve,
    ObstacleSet,
    Ray,
    Torus,
    _round_link,
    classify_ray,
    classify_rays,
    clearance,
    linking_number,
    make_c_curve,
    point_in_obstacle,
    ray_in_exterior,
    rays_exterior,
    tube_disjointness,
)

from .conftest import disc_crossing_sign, random_unit


def torus_quartic_hits(x, v, tor):
    """Whether the line x + tau v meets the solid torus, from the implicit quartic."""
    a, b, n = tor.major_radius, tor.minor_radius, tor.axis
    q0 = x - tor.center
    tau0 = -(q0 @ v)
    span = np.linalg.norm(q0 + tau0 * v) + a + b + 1.0
    ts = tau0 + span * np.linspace(-1.0, 1.0, 5)

    def f(t):
        q = q0[None, :] + t[:, None] * v[None, :]
        qq = np.sum(q * q, axis=1)
        return (qq + a * a - b * b) ** 2 - 4 * a * a * (qq - (q @ n) ** 2)

    coef = np.polyfit(ts, f(ts), 4)
    crit = np.roots(np.polyder(coef))
    crit = crit[np.abs(crit.imag) < 1e-9 * span].real
    return bool(np.min(f(crit)) <= 0.0)


class TestObstacles:
    def test_point_membership(self, K1):
        assert point_in_obstacle([1.0, 0.0, 0.0], K1)
        assert not point_in_obstacle([0.0, 0.0, 0.0], K1)
        assert not point_in_obstacle([1.0, 0.0, 0.31], K1)

    def test_torus_parameters_validated(self):
        with pytest.raises(ConfigError):
            Torus([0, 0, 0], 0.3, 0.3)
        with pytest.raises(ConfigError):
            Torus([0, 0, 0], 1.0, 0.3, [0.0, 0.0, 2.0])

    def test_intersecting_components_rejected(self):
        with pytest.raises(ConfigError):
            ObstacleSet((Torus([0, 0, 0], 1.0, 0.3), Torus([0.5, 0, 0], 1.0, 0.3)), (), 5.0)
        with pytest.raises(ConfigError):
            ObstacleSet((Torus([0, 0, 0], 1.0, 0.3),), (Ball([1.0, 0, 0.4], 0.2),), 5.0)

    def test_component_outside_enclosing_ball_rejected(self):
        with pytest.raises(ConfigError):
            ObstacleSet((Torus([0, 0, 0], 1.0, 0.3),), (), 1.2)

    def test_dict_round_trip(self, K2):
        again = ObstacleSet.from_dict(K2.to_dict())
        assert again.to_dict() == K2.to_dict()

    def test_flux_loop_links_core(self, K2):
        for t in K2.tori:
            assert linking_number(t.flux_loop(), t.core_circle()).value == 1


class TestExterior:
    def test_examples(self):
        K = ObstacleSet((Torus([0, 0, 0], 1.0, 0.3),), (Ball([0, 0, 2.0], 0.3),), 4.0)
        assert ray_in_exterior(Ray([0, 0, -3], [0, 0, 1]), ObstacleSet((Torus([0, 0, 0], 1.0, 0.3),), (), 4.0))
        assert not ray_in_exterior(Ray([0, 0, 0], [0, 0, 1]), K)
        R = 0.3
        assert ray_in_exterior(Ray([-3, R + 1e-3, 2.0], [1, 0, 0]), K)
        assert not ray_in_exterior(Ray([-3, R - 1e-3, 2.0], [1, 0, 0]), K)

    def test_against_torus_quartic(self, torus, K1, rng):
        checked = 0
        for _ in range(300):
            v = random_unit(rng)
            x = rng.uniform(-1.6, 1.6, 3)
            if abs(clearance(x, v, K1)[0]) < 1e-4:
                continue
            assert rays_exterior(x, v, K1)[0] == (not torus_quartic_hits(x, v, torus))
            checked += 1
        assert checked > 250


class TestCCurve:
    def test_central_chord_length(self):
        c = make_c_curve(Ray([0, 0, 0], [0, 0, 1]), 3.0)
        seg = c.pieces[0]
        assert np.linalg.norm(seg.position(1.0) - seg.position(0.0)) == pytest.approx(6.0, abs=1e-12)

    def test_offset_chord_length(self):
        c = make_c_curve(Ray([1.7, 0, 5.0], [0, 0, 1]), 3.0)
        seg = c.pieces[0]
        length = np.linalg.norm(seg.position(1.0) - seg.position(0.0))
        assert length == pytest.approx(2 * np.sqrt(9.0 - 1.7**2), abs=1e-12)

    def test_curve_is_closed_and_on_sphere(self):
        c = make_c_curve(Ray([0.4, -0.9, 0.2], [0.3, 0.2, 1.0]), 3.0)
        arc = c.pieces[1]
        pts = arc.position(np.linspace(0, 1, 50))
        assert np.allclose(np.linalg.norm(pts, axis=1), 3.0, atol=1e-12)
        assert np.allclose(arc.position(1.0), c.pieces[0].position(0.0), atol=1e-12)

    def test_missing_ray(self):
        with pytest.raises(NoIntersection):
            make_c_curve(Ray([3.5, 0, 0], [0, 0, 1]), 3.0)

    def test_open_polyline_rejected(self):
        with pytest.raises(ConfigError):
            ClosedCurve.polyline([[0, 0, 0], [1, 0, 0], [1, 1, 0]])


class TestLinking:
    def test_unlinked_coplanar_circles(self):
        c1 = ClosedCurve.circle([0, 0, 0], 1.0, [1, 0, 0], [0, 1, 0])
        c2 = ClosedCurve.circle([5, 0, 0], 1.0, [1, 0, 0], [0, 1, 0])
        assert linking_number(c1, c2).value == 0

    def test_touching_curves(self):
        c1 = ClosedCurve.circle([0, 0, 0], 1.0, [1, 0, 0], [0, 1, 0])
        c2 = ClosedCurve.polyline([[1, 0, 0], [3, 0, 0], [3, 1, 0], [1, 0, 0]])
        with pytest.raises(CurvesTooClose):
            linking_number(c1, c2)

    def test_rounding_rejects_fractions(self):
        assert _round_link(0.996) == 1
        with pytest.raises(NonIntegerLink):
            _round_link(0.5)

    def test_matches_signed_disc_crossings(self, K1, torus, rng):
        r = K1.enclosing_radius
        for _ in range(40):
            v = random_unit(rng)
            x = rng.uniform(-1.2, 1.2, 3)
            if clearance(x, v, K1)[0] < 1e-3:
                continue
            c = make_c_curve(Ray(x, v), K1)
            seg = c.pieces[0]
            expected = disc_crossing_sign(seg.position(0.0), seg.position(1.0), torus)
            assert linking_number(c, torus.core_circle()).value == expected
            assert np.linalg.norm(seg.position(0.0)) == pytest.approx(r)

    def test_antisymmetry_and_separation(self, K1, torus, rng):
        gamma = torus.core_circle()
        for _ in range(20):
            v = random_unit(rng)
            x = rng.uniform(-1.2, 1.2, 3)
            if clearance(x, v, K1)[0] < 0.1 * torus.minor_radius:
                continue
            c = make_c_curve(Ray(x, v), K1)
            fwd = linking_number(c, gamma)
            back = linking_number(c, gamma.reversed())
            assert back.value == -fwd.value
            assert abs(fwd.raw - fwd.value) < 0.01


class TestClassification:
    def test_axis_ray_goes_through_hole(self, K1):
        cls = classify_ray(Ray([0, 0, -2], [0, 0, 1]), K1)
        assert (cls.tag, cls.hole, cls.sign) == (THROUGH_HOLE, 0, 1)
        cls = classify_ray(Ray([0, 0, 2], [0, 0, -1]), K1)
        assert (cls.tag, cls.hole, cls.sign) == (THROUGH_HOLE, 0, -1)

    def test_far_ray_outside(self, K1):
        assert classify_ray(Ray([0, 3.5, 0], [0, 0, 1]), K1).tag == OUTSIDE
        assert classify_ray(Ray([0, 2.0, 0], [0, 0, 1]), K1).tag == OUTSIDE

    def test_body_ray_blocked(self, K1):
        assert classify_ray(Ray([1.0, 0, 0], [0, 0, 1]), K1).tag == BLOCKED

    def test_two_tori_distinguished(self, K2):
        a = classify_ray(Ray([0, 0, 0], [0, 0, 1]), K2)
        b = classify_ray(Ray([3.5, 0, 0], [0, 1, 0]), K2)
        assert a.key == (0, 1) and b.key == (1, 1)
        assert a.linking == (1, 0) and b.linking == (0, 1)

    def test_stacked_holes_unsupported(self):
        K = ObstacleSet((Torus([0, 0, -1.0], 1.0, 0.3), Torus([0, 0, 1.0], 1.0, 0.3)), (), 4.0)
        with pytest.raises(UnsupportedTopology):
            classify_ray(Ray([0, 0, 0], [0, 0, 1]), K)

    def test_enclosing_radius_irrelevant(self, torus, rng):
        small = ObstacleSet((torus,), (), 3.0)
        big = ObstacleSet((torus,), (), 6.0)
        for _ in range(15):
            v = random_unit(rng)
            x = rng.uniform(-1.2, 1.2, 3)
            assert classify_ray(Ray(x, v), small) == classify_ray(Ray(x, v), big)

    def test_batched_matches_single(self, K2, rng):
        v = random_unit(rng)
        pts = rng.uniform(-4.0, 4.0, (40, 3))
        batch = classify_rays(pts, v, K2)
        for p, c in zip(pts, batch):
            assert c == classify_ray(Ray(p, v), K2)

    @settings(max_examples=25, deadline=None)
    @given(s=st.floats(-50.0, 50.0), hx=st.floats(-0.6, 0.6), hy=st.floats(-0.6, 0.6))
    def test_translation_along_ray(self, s, hx, hy):
        K = ObstacleSet((Torus([0, 0, 0], 1.0, 0.3),), (), 3.0)
        ray = Ray([hx, hy, -1.0], [0.1, 0.2, 1.0])
        assert classify_ray(ray.shifted(s), K) == classify_ray(ray, K)


class TestTubes:
    def test_examples(self, K2):
        assert tube_disjointness(K2, [0, 0, 1])
        assert not tube_disjointness(K2, [1, 0, 0])
        K = ObstacleSet((Torus([0, 0, 0], 1.0, 0.3),), (Ball([0, 0, 2.0], 0.3),), 4.0)
        assert not tube_disjointness(K, [0, 0, 1])
        assert tube_disjointness(K, [1, 0, 0])
