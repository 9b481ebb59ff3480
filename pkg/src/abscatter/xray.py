"""X-ray transforms along straight lines and the gauge-invariant phase ratio.

``a(v, x) = int v.A(x + tau v) dtau`` depends on the gauge. Downstream code
should consume ``exp(i a)`` or ratios of such factors; the raw value is
returned with ``gauge_dependent=True`` as a reminder.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import RayBlocked, TailBoundUnavailable
from .fields import MagneticFieldModel, PotentialField, ScalarPotentialModel
from .geometry import ObstacleSet, Ray, orthonormal_frame, rays_exterior, unit
from .quadrature import line_integrals


@dataclass(frozen=True)
class RayTransformSample:
    direction: np.ndarray
    transverse: np.ndarray
    value: object
    est_error: float
    gauge_dependent: bool = False


def _prepare(points, direction, K):
    x = np.atleast_2d(np.asarray(points, dtype=float))
    v = unit(direction)
    if K is not None:
        ok = rays_exterior(x, v, K)
        if not np.all(ok):
            bad = np.flatnonzero(~ok)
            raise RayBlocked(f"{bad.size} ray(s) meet the obstacle, first base point {x[bad[0]].tolist()}")
    return x, v


def _field_integrals(func, support, decay, x, v, tol, value_shape, what):
    if support is None and decay is None:
        raise TailBoundUnavailable(f"{what} has neither compact support nor a decay envelope")
    return line_integrals(func, x, v, tol, support=support, decay=decay, value_shape=value_shape)


def xray_a_batch(A: PotentialField, points, direction, tol: float = 1e-8, K: ObstacleSet | None = None):
    """Values and error estimates of ``a(v, x)`` for many parallel lines."""
    x, v = _prepare(points, direction, K)
    terms = A.terms
    vals = np.zeros(len(x))
    errs = np.zeros(len(x))
    for t in terms:
        if t.support is not None and t.support.radius == 0.0:
            continue
        f = lambda p, ev=t.evaluator: ev(p) @ v  # noqa: E731
        val, err = _field_integrals(f, t.support, t.decay, x, v, tol / len(terms), (), f"potential part {t.gauge_tag!r}")
        vals += val
        errs += err
    return vals, errs


def xray_a(A: PotentialField, ray: Ray, tol: float = 1e-8, K: ObstacleSet | None = None) -> RayTransformSample:
    val, err = xray_a_batch(A, ray.base, ray.direction, tol, K)
    return RayTransformSample(ray.direction, ray.transverse, float(val[0]), float(err[0]), gauge_dependent=True)


def xray_V_batch(V: ScalarPotentialModel, points, direction, tol: float = 1e-8, K: ObstacleSet | None = None):
    x, v = _prepare(points, direction, K)
    if V.support is not None and V.support.radius == 0.0:
        return np.zeros(len(x)), np.zeros(len(x))
    return _field_integrals(V.evaluator, V.support, V.decay, x, v, tol, (), "electric potential")


def xray_V(V: ScalarPotentialModel, ray: Ray, tol: float = 1e-8, K: ObstacleSet | None = None) -> RayTransformSample:
    val, err = xray_V_batch(V, ray.base, ray.direction, tol, K)
    return RayTransformSample(ray.direction, ray.transverse, float(val[0]), float(err[0]))


def xray_transverse_B_batch(B: MagneticFieldModel, points, direction, tol: float = 1e-8, K: ObstacleSet | None = None):
    """``int v x B(x + tau v) dtau`` for many parallel lines, shape ``(m, 3)``."""
    x, v = _prepare(points, direction, K)
    if B.support is not None and B.support.radius == 0.0:
        return np.zeros((len(x), 3)), np.zeros(len(x))
    f = lambda p: np.cross(v, B.evaluator(p))  # noqa: E731
    vals, errs = _field_integrals(f, B.support, B.decay, x, v, tol, (3,), "magnetic field")
    vals -= np.outer(vals @ v, v)
    return vals, errs


def xray_transverse_B(B: MagneticFieldModel, ray: Ray, tol: float = 1e-8, K: ObstacleSet | None = None) -> RayTransformSample:
    val, err = xray_transverse_B_batch(B, ray.base, ray.direction, tol, K)
    return RayTransformSample(ray.direction, ray.transverse, val[0], float(err[0]))


def phase_factors(A: PotentialField, points, direction, tol: float = 1e-10, K: ObstacleSet | None = None) -> np.ndarray:
    a, _ = xray_a_batch(A, points, direction, tol, K)
    return np.exp(1j * a)


def phase_ratio(A: PotentialField, x, y, direction, tol: float = 1e-10, K: ObstacleSet | None = None) -> complex:
    """``R(x, y) = exp(i int v.(A(x + tau v) - A(y + tau v)) dtau)``."""
    f = phase_factors(A, np.vstack([np.asarray(x, float), np.asarray(y, float)]), direction, tol, K)
    return complex(f[0] * np.conj(f[1]))


def grad_from_phase_ratios(ratio_plus: np.ndarray, ratio_minus: np.ndarray, ratio_center: np.ndarray, h: float) -> np.ndarray:
    """``Re[(1/i) conj(R) dR/ds]`` by central differences along one direction."""
    return np.real(np.conj(ratio_center) * (ratio_plus - ratio_minus) / (2.0 * h) / 1j)


def grad_a_from_ratio_batch(A: PotentialField, points, y, direction, h: float = 1e-3, tol: float = 1e-11, K: ObstacleSet | None = None) -> np.ndarray:
    """Transverse gradient of ``a`` at many base points from phase factors only."""
    x = np.atleast_2d(np.asarray(points, dtype=float))
    v = unit(direction)
    e1, e2 = orthonormal_frame(v)
    m = len(x)
    stack = np.vstack([x, x + h * e1, x - h * e1, x + h * e2, x - h * e2, np.asarray(y, float)[None]])
    f = phase_factors(A, stack, v, tol, K)
    ref = np.conj(f[-1])
    R = f[:-1] * ref
    c, p1, m1, p2, m2 = (R[k * m : (k + 1) * m] for k in range(5))
    g1 = grad_from_phase_ratios(p1, m1, c, h)
    g2 = grad_from_phase_ratios(p2, m2, c, h)
    return g1[:, None] * e1 + g2[:, None] * e2


def grad_a_from_ratio(A: PotentialField, x, y, direction, h: float = 1e-3, tol: float = 1e-11, K: ObstacleSet | None = None) -> np.ndarray:
    return grad_a_from_ratio_batch(A, x, y, direction, h, tol, K)[0]


def outside_anchor(K: ObstacleSet, direction) -> np.ndarray:
    """Base point of a line missing the enclosing ball, where ``a`` vanishes for short-range potentials."""
    e1, _ = orthonormal_frame(unit(direction))
    return 1.5 * K.enclosing_radius * e1
