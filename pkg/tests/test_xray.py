import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from abscatter.errors import RayBlocked, TailBoundUnavailable
from abscatter.fields import (
    FluxAssignment,
    ab_potential,
    add_integer_flux,
    angular_gauge,
    bump_gauge,
    exact_coulomb_potential,
    gauge_shift,
    gaussian_potential,
    make_test_bump_field,
    zero_field,
    zero_scalar_potential,
)
from abscatter.geometry import ObstacleSet, Ray, Torus, classify_ray, orthonormal_frame
from abscatter.xray import (
    grad_a_from_ratio_batch,
    outside_anchor,
    phase_factors,
    xray_a,
    xray_a_batch,
    xray_transverse_B,
    xray_transverse_B_batch,
    xray_V,
)

from .conftest import random_unit


def random_exterior_rays(K, rng, n, want):
    """Random rays of the requested class tag ('ThroughHole' or 'Outside')."""
    rays = []
    while len(rays) < n:
        v = random_unit(rng)
        if abs(v[2]) < 0.3 and want == "ThroughHole":
            continue
        x = rng.uniform(-2.5, 2.5, 3)
        r = Ray(x, v)
        c = classify_ray(r, K)
        if c.tag == want:
            rays.append((r, c))
    return rays


@pytest.fixture
def bump_setup():
    K = ObstacleSet((Torus([0, 0, 0], 1.0, 0.3),), (), 6.0)
    B = make_test_bump_field([3.0, 3.0, 1.0], 0.8, 1.0, K, direction=[1.0, 1.0, 0.5])
    return K, B, exact_coulomb_potential(B)


class TestMagneticXray:
    def test_hole_rays_carry_flux(self, K1, rng):
        A = ab_potential(FluxAssignment((2.0,)), K1)
        for ray, cls in random_exterior_rays(K1, rng, 6, "ThroughHole"):
            assert xray_a(A, ray, K=K1).value == pytest.approx(2.0 * cls.sign, abs=1e-5)

    def test_outside_rays_vanish(self, K1, rng):
        A = ab_potential(FluxAssignment((2.0,)), K1)
        for ray, _ in random_exterior_rays(K1, rng, 6, "Outside"):
            assert abs(xray_a(A, ray, K=K1).value) < 1e-5
        assert abs(xray_a(A, Ray([0, 3.2, 0], [0, 0, 1]), K=K1).value) < 1e-6

    def test_blocked(self, K1):
        A = ab_potential(FluxAssignment((2.0,)), K1)
        with pytest.raises(RayBlocked):
            xray_a(A, Ray([1.0, 0, 0], [0, 0, 1]), K=K1)

    def test_long_range_gauge_has_no_tail_bound(self, K1):
        A = gauge_shift(ab_potential(FluxAssignment((1.0,)), K1), angular_gauge([0, 0, 1], 1.0))
        with pytest.raises(TailBoundUnavailable):
            xray_a(A, Ray([0, 0, 0], [0, 0, 1]), K=K1)

    def test_compact_gauge_leaves_value(self, K1, rng):
        A = ab_potential(FluxAssignment((1.0,)), K1)
        A2 = gauge_shift(A, bump_gauge([0.0, 0.0, 1.2], 0.6, 3.0))
        base = rng.uniform(-0.5, 0.5, (10, 3))
        v = np.array([0.1, 0.0, 1.0])
        a1, _ = xray_a_batch(A, base, v, 1e-11, K1)
        a2, _ = xray_a_batch(A2, base, v, 1e-11, K1)
        assert np.abs(a1 - a2).max() < 1e-8

    def test_integer_flux_keeps_phase(self, K1, rng):
        A = ab_potential(FluxAssignment((0.4,)), K1)
        A3 = add_integer_flux(A, [3], K1)
        base = rng.uniform(-2.0, 2.0, (20, 3))
        v = np.array([0.2, -0.1, 1.0])
        keep = [classify_ray(Ray(b, v), K1).tag != "Blocked" for b in base]
        f1 = phase_factors(A, base[keep], v, K=K1)
        f3 = phase_factors(A3, base[keep], v, K=K1)
        assert np.abs(f1 - f3).max() < 1e-6

    def test_linear_in_potential(self, bump_setup):
        K, _, A = bump_setup
        G = ab_potential(FluxAssignment((0.7,)), K)
        ray = Ray([2.9, 3.1, 0.0], [0.0, 0.2, 1.0])
        a = xray_a(A + G.scaled(2.0), ray, 1e-11).value
        b = xray_a(A, ray, 1e-11).value + 2.0 * xray_a(G, ray, 1e-11).value
        assert a == pytest.approx(b, abs=1e-9)

    @settings(max_examples=20, deadline=None)
    @given(s=st.floats(-30.0, 30.0))
    def test_translation_along_ray(self, s):
        K = ObstacleSet((Torus([0, 0, 0], 1.0, 0.3),), (), 3.0)
        A = ab_potential(FluxAssignment((1.5,)), K)
        ray = Ray([0.2, -0.1, 0.0], [0.1, 0.3, 1.0])
        assert xray_a(A, ray.shifted(s), 1e-10).value == pytest.approx(xray_a(A, ray, 1e-10).value, abs=1e-8)


class TestElectricXray:
    def test_zero(self):
        assert xray_V(zero_scalar_potential(), Ray([0, 0, 0], [1, 0, 0])).value == 0.0

    def test_gaussian_closed_form(self):
        sigma, amp = 0.2, 1.3
        V = gaussian_potential([0.5, 0.2, -0.1], sigma, amp)
        for d in (0.0, 0.15, 0.4):
            ray = Ray([0.5 + d, 0.2, -3.0], [0, 0, 1])
            expect = amp * np.sqrt(2 * np.pi) * sigma * np.exp(-d * d / (2 * sigma**2))
            assert xray_V(V, ray, 1e-10).value == pytest.approx(expect, abs=1e-8)

    def test_far_ray_small(self):
        V = gaussian_potential([0.0, 0.0, 0.0], 0.2, 1.0)
        assert abs(xray_V(V, Ray([1.0, 0, 0], [0, 0, 1])).value) < 1e-5


class TestTransverseField:
    def test_zero_field(self):
        s = xray_transverse_B(zero_field(), Ray([0, 0, 0], [0, 0, 1]))
        assert np.all(s.value == 0.0)

    def test_orthogonal_to_direction(self, bump_setup):
        _, B, _ = bump_setup
        v = np.array([0.3, -0.4, 1.0])
        vals, _ = xray_transverse_B_batch(B, [[3.0, 3.0, 1.0], [3.2, 2.9, 1.0]], v)
        assert np.abs(vals @ (v / np.linalg.norm(v))).max() < 1e-14
        assert np.abs(vals).max() > 1e-2

    def test_matches_gradient_of_potential_integral(self, bump_setup):
        _, B, A = bump_setup
        v = np.array([0.0, 0.3, 1.0]) / np.linalg.norm([0.0, 0.3, 1.0])
        e1, e2 = orthonormal_frame(v)
        x = np.array([3.1, 2.8, 1.0])
        h = 1e-4
        grad = sum(
            (xray_a(A, Ray(x + h * e, v), 1e-12).value - xray_a(A, Ray(x - h * e, v), 1e-12).value) / (2 * h) * e
            for e in (e1, e2)
        )
        wb = xray_transverse_B(B, Ray(x, v), 1e-12).value
        assert np.linalg.norm(grad - wb) < 1e-6 * np.linalg.norm(wb)


class TestPhaseRatioGradient:
    def test_outside_rays_have_zero_gradient(self, K1):
        A = ab_potential(FluxAssignment((1.0,)), K1)
        v = np.array([0.0, 0.0, 1.0])
        pts = np.array([[0.0, 3.5, 0.0], [2.0, 0.5, 0.0], [-2.2, 0.1, 0.0]])
        g = grad_a_from_ratio_batch(A, pts, outside_anchor(K1, v), v, K=K1)
        assert np.abs(g).max() < 1e-4

    def test_matches_transverse_field(self, bump_setup):
        K, B, A = bump_setup
        A = A + ab_potential(FluxAssignment((1.0,)), K)
        v = np.array([0.2, 0.0, 1.0])
        pts = np.array([[3.0, 3.0, 1.0], [3.3, 2.7, 1.0], [2.6, 3.2, 1.0]])
        g = grad_a_from_ratio_batch(A, pts, outside_anchor(K, v), v, K=K)
        wb, _ = xray_transverse_B_batch(B, pts, v, 1e-12)
        assert np.abs(g - wb).max() < 2e-3 * np.abs(wb).max()

    def test_gauge_invariant(self, bump_setup):
        K, _, A = bump_setup
        A2 = gauge_shift(A, bump_gauge([3.0, 3.0, 1.0], 1.0, 5.0))
        v = np.array([0.2, 0.0, 1.0])
        pts = np.array([[3.0, 3.0, 1.0], [3.3, 2.7, 1.0]])
        g1 = grad_a_from_ratio_batch(A, pts, outside_anchor(K, v), v, K=K)
        g2 = grad_a_from_ratio_batch(A2, pts, outside_anchor(K, v), v, K=K)
        assert np.abs(g1 - g2).max() < 1e-8
