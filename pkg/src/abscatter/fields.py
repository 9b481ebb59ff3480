"""Magnetic potentials, test fields, gauge functions and electric potentials.

Every evaluator maps an ``(n, 3)`` array of points to ``(n, 3)`` vectors (or
``(n,)`` scalars for electric potentials). Potentials are sums of parts; each
part declares either a compact support or a power-law decay envelope so the
X-ray transforms can bound their truncation error.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np
from scipy.special import ellipe, ellipk

from .errors import ConfigError, OnCurve, QuadratureFailure, SupportOverlapsObstacle
from .geometry import Ball, ObstacleSet, Torus, component_gap, orthonormal_frame, unit
from .quadrature import Decay, Support, composite_rule, curve_integral, gauss_legendre

ON_CURVE_TOL = 1e-9
LOOP_REL_TOL = 1e-10
SHORT_RANGE = "ShortRange"
LONG_RANGE = "LongRange"


def _points(x) -> tuple[np.ndarray, bool]:
    a = np.asarray(x, dtype=float)
    single = a.ndim == 1
    return np.atleast_2d(a), single


def _shape_like(vals, single):
    return vals[0] if single else vals


# ---------------------------------------------------------------------------
# flux assignments


@dataclass(frozen=True)
class FluxAssignment:
    """Dimensionless flux per torus (phase units)."""

    phi: tuple

    def __post_init__(self):
        phi = tuple(float(p) for p in np.atleast_1d(np.asarray(self.phi, dtype=float)))
        if not all(np.isfinite(phi)):
            raise ConfigError("flux values must be finite")
        object.__setattr__(self, "phi", phi)

    @classmethod
    def zeros(cls, n: int) -> "FluxAssignment":
        return cls((0.0,) * n)

    def __len__(self):
        return len(self.phi)

    def __getitem__(self, j):
        return self.phi[j]

    def __add__(self, other: "FluxAssignment") -> "FluxAssignment":
        if len(other) != len(self):
            raise ConfigError("flux assignments have different lengths")
        return FluxAssignment(tuple(a + b for a, b in zip(self.phi, other.phi)))

    def wrapped(self) -> tuple:
        return tuple(wrap_phase(p) for p in self.phi)


def wrap_phase(x):
    """Representative in (-pi, pi]; pi itself maps to pi."""
    y = np.pi - np.mod(np.pi - np.asarray(x, dtype=float), 2.0 * np.pi)
    return float(y) if np.ndim(y) == 0 else y


# ---------------------------------------------------------------------------
# field containers


@dataclass(frozen=True)
class MagneticFieldModel:
    tag: str
    evaluator: Callable
    support: Support | None = None
    decay: Decay | None = None
    mu: float = np.inf
    curl: Callable | None = None
    coulomb: Callable | None = None
    params: dict = field(default_factory=dict)

    def __call__(self, x):
        pts, single = _points(x)
        return _shape_like(self.evaluator(pts), single)


@dataclass(frozen=True)
class ScalarPotentialModel:
    evaluator: Callable
    alpha: float
    support: Support | None = None
    decay: Decay | None = None
    tag: str = "scalar"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.alpha > 1.0:
            raise ConfigError("electric potential decay exponent must exceed 1")

    def __call__(self, x):
        pts, single = _points(x)
        return _shape_like(self.evaluator(pts), single)


@dataclass(frozen=True)
class PotentialField:
    """Magnetic potential, possibly a sum of parts.

    A primitive part has an ``evaluator`` and either ``support`` or
    ``decay``. A composite has ``parts`` and evaluates their sum.
    """

    evaluator: Callable | None = None
    flux: FluxAssignment | None = None
    range_class: str = SHORT_RANGE
    epsilon: float = 1.0
    gauge_tag: str = ""
    lambda_infinity: Callable | None = None
    decay: Decay | None = None
    support: Support | None = None
    parts: tuple = ()

    def __call__(self, x):
        pts, single = _points(x)
        if self.parts:
            out = np.zeros_like(pts)
            for p in self.parts:
                out = out + p.evaluator(pts)
        else:
            out = self.evaluator(pts)
        return _shape_like(out, single)

    @property
    def terms(self) -> tuple:
        return self.parts if self.parts else (self,)

    def lambda_inf(self, direction) -> float:
        total = 0.0
        for p in self.terms:
            if p.lambda_infinity is not None:
                total += float(p.lambda_infinity(unit(direction)))
        return total

    def __add__(self, other: "PotentialField") -> "PotentialField":
        return combine([self, other])

    def scaled(self, c: float) -> "PotentialField":
        terms = []
        for p in self.terms:
            ev = p.evaluator
            lam = p.lambda_infinity
            terms.append(
                replace(
                    p,
                    evaluator=lambda x, ev=ev: c * ev(x),
                    flux=None if p.flux is None else FluxAssignment(tuple(c * f for f in p.flux.phi)),
                    decay=None if p.decay is None else p.decay.scaled(c),
                    lambda_infinity=None if lam is None else (lambda d, lam=lam: c * lam(d)),
                )
            )
        return combine(terms, gauge_tag=self.gauge_tag)


def combine(fields: Sequence[PotentialField], *, gauge_tag: str | None = None) -> PotentialField:
    terms: list[PotentialField] = []
    for f in fields:
        terms.extend(f.terms)
    fluxes = [t.flux for t in terms if t.flux is not None]
    flux = None
    if fluxes:
        flux = fluxes[0]
        for f in fluxes[1:]:
            flux = flux + f
    long = any(t.range_class == LONG_RANGE for t in terms)
    eps = min((t.epsilon for t in terms), default=1.0)
    tag = gauge_tag if gauge_tag is not None else "+".join(t.gauge_tag for t in terms if t.gauge_tag)
    return PotentialField(
        flux=flux,
        range_class=LONG_RANGE if long else SHORT_RANGE,
        epsilon=eps,
        gauge_tag=tag,
        parts=tuple(terms),
    )


def zero_potential(n_tori: int = 0) -> PotentialField:
    return PotentialField(
        evaluator=lambda x: np.zeros_like(x),
        flux=FluxAssignment.zeros(n_tori) if n_tori else None,
        gauge_tag="zero",
        support=Support(np.zeros(3), 0.0),
    )


# ---------------------------------------------------------------------------
# loop potentials


def _loop_elliptic(tor: Torus, x: np.ndarray) -> np.ndarray:
    n = tor.axis
    a = tor.major_radius
    q = x - tor.center
    z = q @ n
    rvec = q - np.outer(z, n)
    rho = np.linalg.norm(rvec, axis=1)
    alpha2 = (a - rho) ** 2 + z**2
    beta2 = (a + rho) ** 2 + z**2
    beta = np.sqrt(beta2)
    m = 4.0 * a * rho / beta2
    K = ellipk(m)
    E = ellipe(m)
    bz = (K + (a * a - rho**2 - z**2) / alpha2 * E) / (2.0 * np.pi * beta)
    small = rho < 1e-5 * a
    safe = np.where(small, 1.0, rho)
    brho = z / (2.0 * np.pi * safe * beta) * (-K + (a * a + rho**2 + z**2) / alpha2 * E)
    brho = np.where(small, 3.0 * a * a * z * rho / (4.0 * (a * a + z**2) ** 2.5), brho)
    rhat = rvec / np.where(rho > 0, rho, 1.0)[:, None]
    return bz[:, None] * n + brho[:, None] * rhat


def _loop_quadrature(tor: Torus, x: np.ndarray, order: int = 32, max_panels: int = 1024) -> np.ndarray:
    e1, e2 = tor.frame
    a = tor.major_radius
    out = np.zeros_like(x)
    active = np.arange(len(x))
    panels = 2

    def rule(P, rows):
        t, w = composite_rule(P, order)
        s = 2.0 * np.pi * t
        g = tor.center + a * (np.cos(s)[:, None] * e1 + np.sin(s)[:, None] * e2)
        dg = 2.0 * np.pi * a * (-np.sin(s)[:, None] * e1 + np.cos(s)[:, None] * e2)
        d = x[rows, None, :] - g[None]
        r3 = np.sum(d * d, axis=2) ** 1.5
        integrand = np.cross(dg[None], d) / r3[..., None]
        return np.einsum("k,rkj->rj", w, integrand) / (4.0 * np.pi)

    prev = rule(panels, active)
    while active.size:
        panels *= 2
        cur = rule(panels, active)
        diff = np.linalg.norm(cur - prev, axis=1)
        done = diff <= LOOP_REL_TOL * np.maximum(np.linalg.norm(cur, axis=1), 1e-300)
        out[active[done]] = cur[done]
        active = active[~done]
        prev = cur[~done]
        if active.size and panels >= max_panels:
            raise QuadratureFailure(f"loop potential not converged at {active.size} point(s)")
    return out


def loop_potential(j: int, K: ObstacleSet, x, method: str = "elliptic"):
    """Biot-Savart field of the unit current on the core circle of torus ``j``.

    ``method='elliptic'`` uses the closed form in complete elliptic
    integrals; ``method='quadrature'`` integrates the Biot-Savart kernel by
    Gauss-Legendre panel doubling to relative tolerance 1e-10.
    """
    tor = K.tori[j]
    pts, single = _points(x)
    if np.any(tor.distance_to_core(pts) <= ON_CURVE_TOL):
        raise OnCurve(f"evaluation point within {ON_CURVE_TOL:g} of the core circle of torus {j}")
    if method == "elliptic":
        vals = _loop_elliptic(tor, pts)
    elif method == "quadrature":
        vals = _loop_quadrature(tor, pts)
    else:
        raise ConfigError(f"unknown loop potential method {method!r}")
    return _shape_like(vals, single)


def loop_decay(tor: Torus) -> Decay:
    """``|G| <= 2a (1+|x|)^-2`` once ``|x| >= 2(|z|+a)+1``."""
    a = tor.major_radius
    return Decay(2.0 * a, 2.0, 2.0 * (np.linalg.norm(tor.center) + a) + 1.0)


def loop_potential_field(j: int, K: ObstacleSet, coefficient: float = 1.0, method: str = "elliptic") -> PotentialField:
    tor = K.tori[j]
    flux = [0.0] * len(K.tori)
    flux[j] = coefficient
    c = float(coefficient)
    return PotentialField(
        evaluator=lambda x: c * loop_potential(j, K, x, method),
        flux=FluxAssignment(tuple(flux)),
        gauge_tag=f"G{j}",
        decay=loop_decay(tor).scaled(c),
    )


def ab_potential(phi: FluxAssignment, K: ObstacleSet) -> PotentialField:
    """``sum_j phi_j G^(j)``: zero field outside K, circulation phi_j around torus j."""
    if len(phi) != len(K.tori):
        raise ConfigError(f"{len(phi)} flux values for {len(K.tori)} tori")
    parts = [loop_potential_field(j, K, phi[j]) for j in range(len(K.tori)) if phi[j] != 0.0]
    if not parts:
        return replace(zero_potential(len(K.tori)), gauge_tag="ab")
    out = combine(parts, gauge_tag="ab")
    return replace(out, flux=phi)


def circulation(A, curve, tol: float = 1e-10) -> float:
    val, _ = curve_integral(lambda x: A(x), curve, tol)
    return val


def circulations(A, K: ObstacleSet, tol: float = 1e-10) -> np.ndarray:
    return np.array([circulation(A, t.flux_loop(), tol) for t in K.tori])


def add_flux_correction(A1: PotentialField, phi: FluxAssignment, K: ObstacleSet, tol: float = 1e-10) -> PotentialField:
    """Add loop potentials so the circulation around each torus equals phi."""
    circ = circulations(A1, K, tol)
    coeffs = [phi[j] - circ[j] for j in range(len(K.tori))]
    parts = [A1] + [loop_potential_field(j, K, c) for j, c in enumerate(coeffs) if c != 0.0]
    out = combine(parts, gauge_tag=A1.gauge_tag)
    return replace(out, flux=phi)


def correction_coefficients(A1: PotentialField, phi: FluxAssignment, K: ObstacleSet, tol: float = 1e-10) -> np.ndarray:
    return np.asarray(phi.phi) - circulations(A1, K, tol)


def add_integer_flux(A: PotentialField, n: Sequence[int], K: ObstacleSet) -> PotentialField:
    n = [int(k) for k in n]
    if len(n) != len(K.tori):
        raise ConfigError(f"{len(n)} integers for {len(K.tori)} tori")
    parts = [A] + [loop_potential_field(j, K, 2.0 * np.pi * k) for j, k in enumerate(n) if k]
    out = combine(parts, gauge_tag=A.gauge_tag)
    base = A.flux if A.flux is not None else FluxAssignment.zeros(len(K.tori))
    return replace(out, flux=base + FluxAssignment(tuple(2.0 * np.pi * k for k in n)))


# ---------------------------------------------------------------------------
# gauge functions


@dataclass(frozen=True)
class GaugeFunction:
    value: Callable
    gradient: Callable | None = None
    support: Support | None = None
    decay: Decay | None = None
    lambda_infinity: Callable | None = None
    fd_step: float = 1e-4
    tag: str = "lambda"

    def grad(self, x):
        pts, single = _points(x)
        if self.gradient is not None:
            return _shape_like(self.gradient(pts), single)
        h = self.fd_step
        g = np.empty_like(pts)
        for k in range(3):
            e = np.zeros(3)
            e[k] = h
            g[:, k] = (self.value(pts + e) - self.value(pts - e)) / (2 * h)
        return _shape_like(g, single)

    def negated(self) -> "GaugeFunction":
        v, g, lam = self.value, self.gradient, self.lambda_infinity
        return replace(
            self,
            value=lambda x: -v(x),
            gradient=None if g is None else (lambda x: -g(x)),
            lambda_infinity=None if lam is None else (lambda d: -lam(d)),
        )


def constant_gauge(c: float) -> GaugeFunction:
    return GaugeFunction(
        value=lambda x: np.full(len(x), float(c)),
        gradient=lambda x: np.zeros_like(x),
        support=Support(np.zeros(3), 0.0),
        lambda_infinity=lambda d: float(c),
        tag="const",
    )


def bump_gauge(center, radius: float, amplitude: float) -> GaugeFunction:
    """``amplitude (1 - |x-c|^2/R^2)^4`` inside the ball, zero outside."""
    c = np.asarray(center, dtype=float)
    R2 = float(radius) ** 2

    def value(x):
        s = np.sum((x - c) ** 2, axis=1) / R2
        return amplitude * np.where(s < 1.0, (1.0 - s) ** 4, 0.0)

    def gradient(x):
        u = x - c
        s = np.sum(u * u, axis=1) / R2
        k = np.where(s < 1.0, -8.0 * amplitude * (1.0 - s) ** 3 / R2, 0.0)
        return k[:, None] * u

    return GaugeFunction(value, gradient, support=Support(c, float(radius)), tag="bump-gauge")


def angular_gauge(direction, amplitude: float) -> GaugeFunction:
    """``amplitude * atan(e.x / sqrt(1+|x|^2))``; tends to ``amplitude*atan(e.x_hat)``."""
    e = unit(direction)

    def value(x):
        return amplitude * np.arctan((x @ e) / np.sqrt(1.0 + np.sum(x * x, axis=1)))

    def gradient(x):
        r2 = 1.0 + np.sum(x * x, axis=1)
        ex = x @ e
        g = ex / np.sqrt(r2)
        dg = e[None, :] / np.sqrt(r2)[:, None] - (ex / r2**1.5)[:, None] * x
        return (amplitude / (1.0 + g * g))[:, None] * dg

    return GaugeFunction(value, gradient, lambda_infinity=lambda d: amplitude * float(np.arctan(unit(d) @ e)), tag="angular-gauge")


def gauge_shift(A: PotentialField, lam: GaugeFunction) -> PotentialField:
    """``A + grad(lambda)``; fluxes are unchanged."""
    compact = lam.support is not None
    part = PotentialField(
        evaluator=lambda x: lam.grad(x),
        range_class=SHORT_RANGE if compact or lam.decay is not None else LONG_RANGE,
        gauge_tag=lam.tag,
        lambda_infinity=lam.lambda_infinity,
        support=lam.support,
        decay=lam.decay,
    )
    out = combine([A, part], gauge_tag=(A.gauge_tag + "+" + lam.tag).strip("+"))
    return replace(out, flux=A.flux)


# ---------------------------------------------------------------------------
# magnetic test fields


BUMP_POWER = 8


def _bump_profile(s, k=BUMP_POWER):
    """(phi', phi'', phi''') of phi(s) = (1 - s)^k, zero for s >= 1."""
    inside = s < 1.0
    t = np.where(inside, 1.0 - s, 0.0)
    d1 = -k * t ** (k - 1)
    d2 = k * (k - 1) * t ** (k - 2)
    d3 = -k * (k - 1) * (k - 2) * t ** (k - 3)
    return d1, d2, d3


def zero_field() -> MagneticFieldModel:
    zero = lambda x: np.zeros_like(x)  # noqa: E731
    return MagneticFieldModel(
        tag="ZeroExterior",
        evaluator=zero,
        support=Support(np.zeros(3), 0.0),
        decay=Decay(0.0, 3.0, 0.0),
        curl=zero,
        coulomb=zero,
    )


def make_test_bump_field(center, radius: float, amplitude: float, K: ObstacleSet | None = None, direction=(0.0, 0.0, 1.0)) -> MagneticFieldModel:
    """Divergence-free compactly supported phantom ``B = curl curl (amplitude psi e)``.

    ``psi = (1 - |x-c|^2/R^2)^8`` on the ball. Its Coulomb potential
    ``curl(amplitude psi e)`` is known in closed form and has the same support.
    """
    c = np.asarray(center, dtype=float).reshape(3)
    R = float(radius)
    if not R > 0.0:
        raise ConfigError("bump radius must be positive")
    e = unit(direction)
    amp = float(amplitude)
    if K is not None:
        ball = Ball(c, R)
        for comp in K.components:
            if component_gap(ball, comp) <= 0.0:
                raise SupportOverlapsObstacle(f"bump support {c.tolist()}, R={R} meets the obstacle")
    R2 = R * R

    def geometry(x):
        u = x - c
        s = np.sum(u * u, axis=1) / R2
        return u, s

    def coulomb(x):
        u, s = geometry(x)
        d1, _, _ = _bump_profile(s)
        return (amp * 2.0 * d1 / R2)[:, None] * np.cross(u, e)

    def evaluator(x):
        u, s = geometry(x)
        d1, d2, _ = _bump_profile(s)
        eu = u @ e
        return (amp * 4.0 * d2 * eu / R2**2)[:, None] * u - (amp * (4.0 * s * d2 + 4.0 * d1) / R2)[:, None] * e

    def curl(x):
        u, s = geometry(x)
        _, d2, d3 = _bump_profile(s)
        return (amp * 2.0 * (10.0 * d2 + 4.0 * s * d3) / R2**2)[:, None] * np.cross(e, u)

    return MagneticFieldModel(
        tag="SmoothBump",
        evaluator=evaluator,
        support=Support(c, R),
        decay=Decay(0.0, 3.0, float(np.linalg.norm(c)) + R),
        curl=curl,
        coulomb=coulomb,
        params={"center": c.tolist(), "radius": R, "amplitude": amp, "direction": e.tolist()},
    )


def exact_coulomb_potential(B: MagneticFieldModel) -> PotentialField:
    """Closed-form Coulomb potential of a built-in test field."""
    if B.coulomb is None:
        raise ConfigError(f"field {B.tag!r} has no closed-form Coulomb potential")
    return PotentialField(evaluator=B.coulomb, gauge_tag="coulomb", support=B.support)


def _sphere_rule(n: int):
    """Gauss-Legendre in the polar angle, trapezoid in azimuth, on [0, 1] x [0, 2pi)."""
    t, w = gauss_legendre(n)
    phi = 2.0 * np.pi * np.arange(2 * n) / (2 * n)
    return t, w, phi


class _CoulombIntegral:
    """Quadrature for ``-(1/4pi) int (x-y)/|x-y|^3 x B(y) dy``.

    Centered at the evaluation point, ``y = x + rho w``, the kernel becomes
    ``(1/4pi) w x B(x + rho w)`` with no singularity. Directions are sampled
    in a cone around the support center (the whole sphere from inside);
    the radial integral covers the chord of the support ball.
    """

    def __init__(self, B: MagneticFieldModel, n_angle: int, n_radial: int):
        self.B = B
        self.c = B.support.center
        self.R = B.support.radius
        self.n_angle = n_angle
        self.rho_t, self.rho_w = gauss_legendre(n_radial)

    def __call__(self, x, n_angle=None):
        n = n_angle or self.n_angle
        t, w, az = _sphere_rule(n)
        out = np.zeros_like(x)
        for k, p in enumerate(x):
            out[k] = self._one(p, t, w, az)
        return out

    def _one(self, p, t, w, az):
        q = self.c - p
        d = np.linalg.norm(q)
        axis = q / d if d > 0 else np.array([0.0, 0.0, 1.0])
        e1, e2 = orthonormal_frame(axis)
        if d < self.R:
            cmin = -1.0
        else:
            cmin = np.sqrt(max(0.0, 1.0 - (self.R / d) ** 2))
        cos_t = 1.0 - (1.0 - cmin) * t
        sin_t = np.sqrt(np.clip(1.0 - cos_t**2, 0.0, None))
        wt = w * (1.0 - cmin)
        omega = (
            cos_t[:, None, None] * axis
            + sin_t[:, None, None] * (np.cos(az)[None, :, None] * e1 + np.sin(az)[None, :, None] * e2)
        ).reshape(-1, 3)
        wo = np.repeat(wt, len(az)) * (2.0 * np.pi / len(az))
        b = -(omega @ q)
        disc = b * b - (d * d - self.R**2)
        root = np.sqrt(np.clip(disc, 0.0, None))
        lo = np.clip(-b - root, 0.0, None)
        hi = np.clip(-b + root, 0.0, None)
        hi = np.where(disc > 0, hi, lo)
        L = hi - lo
        rho = lo[:, None] + L[:, None] * self.rho_t[None, :]
        y = p + rho[..., None] * omega[:, None, :]
        By = self.B.evaluator(y.reshape(-1, 3)).reshape(y.shape)
        radial = np.einsum("k,dkj->dj", self.rho_w, By) * L[:, None]
        return np.einsum("d,dj->j", wo, np.cross(omega, radial)) / (4.0 * np.pi)


def coulomb_potential_from_B(B: MagneticFieldModel, support_box=None, n_angle: int = 32, n_radial: int = 16, tol: float = 1e-6) -> PotentialField:
    """Coulomb-gauge potential of a compactly supported field by direct volume quadrature.

    Convergence is checked at construction on probe points by comparing the
    angular resolution ``n_angle`` with ``2 n_angle``; disagreement beyond
    ``tol`` (relative to the field scale) raises :class:`QuadratureFailure`.
    """
    if B.support is None:
        raise ConfigError("volume quadrature needs a compactly supported field")
    if support_box is not None:
        lo, hi = np.asarray(support_box[0], dtype=float), np.asarray(support_box[1], dtype=float)
        c, R = B.support.center, B.support.radius
        if np.any(c - R < lo) or np.any(c + R > hi):
            raise ConfigError("field support is not contained in the support box")
    if B.support.radius == 0.0:
        return replace(zero_potential(), gauge_tag="coulomb")
    integ = _CoulombIntegral(B, n_angle, n_radial)
    c, R = B.support.center, B.support.radius
    probes = c + R * np.array([[0.0, 0.0, 0.0], [0.3, -0.2, 0.1], [-0.5, 0.4, 0.3], [0.1, 0.7, -0.6], [1.3, 0.2, 0.0]])
    coarse = integ(probes)
    fine = integ(probes, 2 * n_angle)
    scale = max(np.abs(fine).max(), 1e-300)
    if np.abs(coarse - fine).max() > tol * scale:
        raise QuadratureFailure(
            f"Coulomb quadrature with {n_angle} and {2 * n_angle} angular nodes differs by {np.abs(coarse - fine).max():.3e}"
        )
    return PotentialField(
        evaluator=integ,
        gauge_tag="coulomb",
        support=B.support,
    )


# ---------------------------------------------------------------------------
# electric potentials


def zero_scalar_potential() -> ScalarPotentialModel:
    return ScalarPotentialModel(lambda x: np.zeros(len(x)), 2.0, support=Support(np.zeros(3), 0.0), tag="zero")


def gaussian_potential(center, sigma: float, amplitude: float) -> ScalarPotentialModel:
    """``amplitude exp(-|x-c|^2 / (2 sigma^2))`` with an explicit ``(1+|x|)^-2`` envelope."""
    c = np.asarray(center, dtype=float).reshape(3)
    s = float(sigma)
    if not s > 0:
        raise ConfigError("Gaussian width must be positive")
    amp = float(amplitude)
    R0 = float(np.linalg.norm(c)) + 8.0 * s
    C = abs(amp) * (1.0 + R0) ** 2 * np.exp(-32.0)
    return ScalarPotentialModel(
        lambda x: amp * np.exp(-np.sum((x - c) ** 2, axis=1) / (2.0 * s * s)),
        2.0,
        decay=Decay(C, 2.0, R0),
        tag="gaussian",
        params={"center": c.tolist(), "sigma": s, "amplitude": amp},
    )


def radial_envelope(A, radii, n_directions: int = 64, exponent: float = 2.0, seed: int = 0) -> np.ndarray:
    """``max |A(r w)| (1+r)^exponent`` over random directions, per radius."""
    rng = np.random.default_rng(seed)
    w = rng.normal(size=(n_directions, 3))
    w /= np.linalg.norm(w, axis=1)[:, None]
    out = []
    for r in radii:
        vals = np.asarray(A(r * w))
        mag = np.linalg.norm(vals, axis=1) if vals.ndim == 2 else np.abs(vals)
        out.append(mag.max() * (1.0 + r) ** exponent)
    return np.array(out)
