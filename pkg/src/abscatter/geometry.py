"""Obstacles, rays, reference curves and hole classification.

The obstacle ``K`` is a finite union of solid tori and balls; its exterior
is where particles propagate. A line threads the hole of torus ``j`` when the
closed curve formed by its chord through the enclosing ball and an arc on
the sphere links the core circle of that torus. Linking numbers are computed
with the Gauss double integral.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import ConfigError, CurvesTooClose, NoIntersection, NonIntegerLink, UnsupportedTopology
from .quadrature import composite_rule

CLOSURE_TOL = 1e-9
INTEGER_TOL = 0.01
LINK_ORDER = 64
LINK_CHANGE_TOL = 1e-4
LINK_MAX_PANELS = 64


def as_vec3(v) -> np.ndarray:
    a = np.asarray(v, dtype=float).reshape(3)
    if not np.all(np.isfinite(a)):
        raise ConfigError(f"non-finite vector {v!r}")
    return a


def unit(v) -> np.ndarray:
    a = as_vec3(v)
    n = np.linalg.norm(a)
    if n == 0.0:
        raise ConfigError("zero vector has no direction")
    return a / n


def orthonormal_frame(axis) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(e1, e2)`` with ``(e1, e2, axis)`` right-handed.

    For ``axis = z`` this gives ``(x, y)``, so circles ``cos t e1 + sin t e2``
    run counter-clockwise about the axis.
    """
    n = unit(axis)
    helper = np.array([1.0, 0.0, 0.0]) if abs(n[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    e1 = helper - (helper @ n) * n
    e1 /= np.linalg.norm(e1)
    return e1, np.cross(n, e1)


def point_circle_distance(points, center, normal, radius) -> np.ndarray:
    """Distance from points to the circle of given center, unit normal and radius."""
    q = np.atleast_2d(points) - center
    h = q @ normal
    rho = np.linalg.norm(q - np.outer(h, normal), axis=1)
    return np.hypot(rho - radius, h)


# ---------------------------------------------------------------------------
# curves


class CurvePiece:
    """Smooth oriented arc parameterized over ``t`` in ``[0, 1]``."""

    def position(self, t):  # pragma: no cover - interface
        raise NotImplementedError

    def tangent(self, t):  # pragma: no cover - interface
        raise NotImplementedError

    def reversed(self) -> "CurvePiece":
        return _Reversed(self)


@dataclass(frozen=True)
class Segment(CurvePiece):
    start: np.ndarray
    end: np.ndarray

    def position(self, t):
        t = np.asarray(t, dtype=float)
        return self.start + t[..., None] * (self.end - self.start)

    def tangent(self, t):
        t = np.asarray(t, dtype=float)
        return np.broadcast_to(self.end - self.start, t.shape + (3,)).copy()


@dataclass(frozen=True)
class CircleArc(CurvePiece):
    """``center + radius (cos s e1 + sin s e2)`` for ``s`` from ``s0`` to ``s1``."""

    center: np.ndarray
    radius: float
    e1: np.ndarray
    e2: np.ndarray
    s0: float = 0.0
    s1: float = 2.0 * np.pi

    def position(self, t):
        s = self.s0 + (self.s1 - self.s0) * np.asarray(t, dtype=float)
        return self.center + self.radius * (np.cos(s)[..., None] * self.e1 + np.sin(s)[..., None] * self.e2)

    def tangent(self, t):
        s = self.s0 + (self.s1 - self.s0) * np.asarray(t, dtype=float)
        k = self.radius * (self.s1 - self.s0)
        return k * (-np.sin(s)[..., None] * self.e1 + np.cos(s)[..., None] * self.e2)


@dataclass(frozen=True)
class _Reversed(CurvePiece):
    inner: CurvePiece

    def position(self, t):
        return self.inner.position(1.0 - np.asarray(t, dtype=float))

    def tangent(self, t):
        return -self.inner.tangent(1.0 - np.asarray(t, dtype=float))

    def reversed(self):
        return self.inner


@dataclass(frozen=True)
class ClosedCurve:
    """Closed, piecewise smooth, oriented curve."""

    pieces: tuple

    def __post_init__(self):
        pieces = tuple(self.pieces)
        if not pieces:
            raise ConfigError("a closed curve needs at least one piece")
        object.__setattr__(self, "pieces", pieces)
        ends = [(p.position(0.0), p.position(1.0)) for p in pieces]
        scale = max(1.0, max(np.abs(e).max() for pair in ends for e in pair))
        for k, (_, end) in enumerate(ends):
            nxt = ends[(k + 1) % len(ends)][0]
            if np.linalg.norm(end - nxt) > CLOSURE_TOL * scale:
                raise ConfigError(f"curve is not closed between pieces {k} and {(k + 1) % len(ends)}")

    @classmethod
    def circle(cls, center, radius, e1, e2) -> "ClosedCurve":
        return cls((CircleArc(as_vec3(center), float(radius), as_vec3(e1), as_vec3(e2)),))

    @classmethod
    def polyline(cls, points) -> "ClosedCurve":
        pts = np.asarray(points, dtype=float)
        if np.linalg.norm(pts[0] - pts[-1]) > CLOSURE_TOL * max(1.0, np.abs(pts).max()):
            raise ConfigError("first and last polyline points differ")
        return cls(tuple(Segment(pts[k], pts[k + 1]) for k in range(len(pts) - 1)))

    def reversed(self) -> "ClosedCurve":
        return ClosedCurve(tuple(p.reversed() for p in reversed(self.pieces)))

    def sample(self, n_per_piece: int = 64) -> np.ndarray:
        t = np.linspace(0.0, 1.0, n_per_piece, endpoint=False)
        pts = [p.position(t) for p in self.pieces]
        pts.append(self.pieces[0].position(np.array([0.0])))
        return np.vstack(pts)

    def nodes(self, panels: int, order: int = LINK_ORDER):
        """Quadrature nodes and weight-scaled tangents, all pieces concatenated."""
        t, w = composite_rule(panels, order)
        r = np.vstack([p.position(t) for p in self.pieces])
        dr = np.vstack([p.tangent(t) * w[:, None] for p in self.pieces])
        return r, dr


# ---------------------------------------------------------------------------
# obstacles


@dataclass(frozen=True)
class Torus:
    center: np.ndarray
    major_radius: float
    minor_radius: float
    axis: np.ndarray = field(default_factory=lambda: np.array([0.0, 0.0, 1.0]))

    def __post_init__(self):
        object.__setattr__(self, "center", as_vec3(self.center))
        ax = as_vec3(self.axis)
        if abs(np.linalg.norm(ax) - 1.0) > 1e-12:
            raise ConfigError(f"torus axis must be a unit vector, got |axis|={np.linalg.norm(ax)}")
        object.__setattr__(self, "axis", ax)
        a, b = float(self.major_radius), float(self.minor_radius)
        if not (a > b > 0.0):
            raise ConfigError(f"torus needs major > minor > 0, got {a}, {b}")
        object.__setattr__(self, "major_radius", a)
        object.__setattr__(self, "minor_radius", b)

    @property
    def frame(self):
        return orthonormal_frame(self.axis)

    @property
    def bounding_radius(self) -> float:
        return self.major_radius + self.minor_radius

    def core_point(self, t) -> np.ndarray:
        e1, e2 = self.frame
        t = np.asarray(t, dtype=float)
        return self.center + self.major_radius * (np.cos(t)[..., None] * e1 + np.sin(t)[..., None] * e2)

    def core_circle(self) -> ClosedCurve:
        e1, e2 = self.frame
        return ClosedCurve.circle(self.center, self.major_radius, e1, e2)

    def flux_loop(self, clearance: float | None = None) -> ClosedCurve:
        """Small circle around the tube at the ``e1`` meridian.

        Its radius exceeds the minor radius by half of ``clearance``
        (default ``(a - b) / 2``). It is oriented so that it links the core
        circle with linking number +1, i.e. it runs along ``+axis`` on the
        side facing the hole.
        """
        a, b = self.major_radius, self.minor_radius
        delta = 0.5 * (a - b) if clearance is None else float(clearance)
        if not (0.0 < delta < a - b):
            raise ConfigError("flux-loop clearance must lie in (0, a - b)")
        e1, _ = self.frame
        return ClosedCurve.circle(self.center + a * e1, b + 0.5 * delta, e1, -self.axis)

    def distance_to_core(self, points) -> np.ndarray:
        return point_circle_distance(points, self.center, self.axis, self.major_radius)

    def contains(self, points) -> np.ndarray:
        return self.distance_to_core(points) <= self.minor_radius

    def to_dict(self) -> dict:
        return {
            "center": self.center.tolist(),
            "major": self.major_radius,
            "minor": self.minor_radius,
            "axis": self.axis.tolist(),
        }


@dataclass(frozen=True)
class Ball:
    center: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", as_vec3(self.center))
        if not float(self.radius) > 0.0:
            raise ConfigError("ball radius must be positive")
        object.__setattr__(self, "radius", float(self.radius))

    @property
    def bounding_radius(self) -> float:
        return self.radius

    def contains(self, points) -> np.ndarray:
        return np.linalg.norm(np.atleast_2d(points) - self.center, axis=1) <= self.radius

    def to_dict(self) -> dict:
        return {"center": self.center.tolist(), "radius": self.radius}


def _circle_circle_distance(t1: Torus, t2: Torus) -> float:
    ts = np.linspace(0.0, 2 * np.pi, 2048, endpoint=False)
    d = t2.distance_to_core(t1.core_point(ts))
    k = int(np.argmin(d))
    step = ts[1] - ts[0]
    res = minimize_scalar(
        lambda t: float(t2.distance_to_core(t1.core_point(np.array([t])))[0]),
        bounds=(ts[k] - step, ts[k] + step),
        method="bounded",
        options={"xatol": 1e-12},
    )
    return min(float(d[k]), float(res.fun))


def component_gap(c1, c2) -> float:
    """Minimum surface-to-surface distance between two obstacle components (negative if they meet)."""
    if isinstance(c1, Ball) and isinstance(c2, Ball):
        return float(np.linalg.norm(c1.center - c2.center)) - c1.radius - c2.radius
    if isinstance(c1, Ball):
        c1, c2 = c2, c1
    if isinstance(c2, Ball):
        return float(c1.distance_to_core(c2.center)[0]) - c1.minor_radius - c2.radius
    return _circle_circle_distance(c1, c2) - c1.minor_radius - c2.minor_radius


@dataclass(frozen=True)
class ObstacleSet:
    tori: tuple = ()
    balls: tuple = ()
    enclosing_radius: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "tori", tuple(self.tori))
        object.__setattr__(self, "balls", tuple(self.balls))
        r = float(self.enclosing_radius)
        object.__setattr__(self, "enclosing_radius", r)
        comps = self.components
        for c in comps:
            if np.linalg.norm(c.center) + c.bounding_radius >= r:
                raise ConfigError(f"component at {c.center.tolist()} is not inside the enclosing ball of radius {r}")
        for i in range(len(comps)):
            for j in range(i + 1, len(comps)):
                if component_gap(comps[i], comps[j]) <= 0.0:
                    raise ConfigError(f"obstacle components {i} and {j} intersect")

    @property
    def components(self) -> tuple:
        return self.tori + self.balls

    @classmethod
    def from_dict(cls, cfg: dict) -> "ObstacleSet":
        try:
            tori = [
                Torus(t["center"], t["major"], t["minor"], unit(t.get("axis", [0.0, 0.0, 1.0])))
                for t in cfg.get("tori", [])
            ]
            balls = [Ball(b["center"], b["radius"]) for b in cfg.get("balls", [])]
            return cls(tuple(tori), tuple(balls), cfg["enclosing_radius"])
        except (KeyError, TypeError) as exc:
            raise ConfigError(f"malformed obstacle config: {exc}") from exc

    def to_dict(self) -> dict:
        return {
            "tori": [t.to_dict() for t in self.tori],
            "balls": [b.to_dict() for b in self.balls],
            "enclosing_radius": self.enclosing_radius,
        }

    def contains(self, points) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        inside = np.zeros(len(pts), dtype=bool)
        for c in self.components:
            inside |= c.contains(pts)
        return inside


@dataclass(frozen=True)
class Ray:
    base: np.ndarray
    direction: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "base", as_vec3(self.base))
        object.__setattr__(self, "direction", unit(self.direction))

    @property
    def transverse(self) -> np.ndarray:
        """Base point projected onto the plane through the origin orthogonal to the direction."""
        return self.base - (self.base @ self.direction) * self.direction

    def shifted(self, s: float) -> "Ray":
        return Ray(self.base + s * self.direction, self.direction)


def point_in_obstacle(p, K: ObstacleSet) -> bool:
    return bool(K.contains(as_vec3(p))[0])


# ---------------------------------------------------------------------------
# rays versus obstacles


def line_circle_distance(points, direction, center, normal, radius, window) -> np.ndarray:
    """Minimum distance between lines ``points + R direction`` and a circle.

    The search is restricted to ``|tau - tau_c| <= window`` around the closest
    approach to the circle center (outside it the distance exceeds
    ``window - radius``). The window is sampled densely and the best sample
    is refined by golden-section search.
    """
    x = np.atleast_2d(points)
    v = direction
    tc = (center - x) @ v
    n_s = 1025
    grid = np.linspace(-window, window, n_s)
    taus = tc[:, None] + grid[None, :]
    pts = x[:, None, :] + taus[..., None] * v
    d = point_circle_distance(pts.reshape(-1, 3), center, normal, radius).reshape(taus.shape)
    k = np.clip(np.argmin(d, axis=1), 1, n_s - 2)
    step = grid[1] - grid[0]
    lo = tc + grid[k] - step
    hi = tc + grid[k] + step
    g = (np.sqrt(5.0) - 1.0) / 2.0

    def dist(t):
        return point_circle_distance(x + t[:, None] * v, center, normal, radius)

    c1 = hi - g * (hi - lo)
    c2 = lo + g * (hi - lo)
    f1, f2 = dist(c1), dist(c2)
    for _ in range(60):
        left = f1 < f2
        hi = np.where(left, c2, hi)
        lo = np.where(left, lo, c1)
        c2n = np.where(left, c1, lo + g * (hi - lo))
        c1n = np.where(left, hi - g * (hi - lo), c2)
        f2 = np.where(left, f1, dist(c2n))
        f1 = np.where(left, dist(c1n), f2)
        c1, c2 = c1n, c2n
    return np.minimum(np.minimum(f1, f2), d.min(axis=1))


def line_point_distance(points, direction, p) -> np.ndarray:
    q = p - np.atleast_2d(points)
    return np.linalg.norm(q - np.outer(q @ direction, direction), axis=1)


def clearance(points, direction, K: ObstacleSet) -> np.ndarray:
    """Signed distance from each line to the obstacle (negative or zero means blocked)."""
    x = np.atleast_2d(np.asarray(points, dtype=float))
    v = unit(direction)
    gap = np.full(len(x), np.inf)
    for t in K.tori:
        d = line_circle_distance(x, v, t.center, t.axis, t.major_radius, 1.0001 * t.bounding_radius)
        gap = np.minimum(gap, d - t.minor_radius)
    for b in K.balls:
        gap = np.minimum(gap, line_point_distance(x, v, b.center) - b.radius)
    return gap


def rays_exterior(points, direction, K: ObstacleSet) -> np.ndarray:
    return clearance(points, direction, K) > 0.0


def ray_in_exterior(ray: Ray, K: ObstacleSet) -> bool:
    return bool(rays_exterior(ray.base, ray.direction, K)[0])


def chord_endpoints(points, direction, r):
    """Entry and exit points of lines through the sphere of radius r, plus impact parameters."""
    x = np.atleast_2d(np.asarray(points, dtype=float))
    v = unit(direction)
    xp = x - np.outer(x @ v, v)
    d = np.linalg.norm(xp, axis=1)
    half = np.sqrt(np.clip(r * r - d * d, 0.0, None))
    return xp - half[:, None] * v, xp + half[:, None] * v, d


def _return_arc(p_out, p_in, r, direction) -> CircleArc:
    e1 = p_out / r
    q = p_in - (p_in @ e1) * e1
    nq = np.linalg.norm(q)
    if nq < 1e-12 * r:
        q = orthonormal_frame(direction)[0]
        q = q - (q @ e1) * e1
        nq = np.linalg.norm(q)
    e2 = q / nq
    omega = float(np.arctan2(p_in @ e2, p_in @ e1))
    if omega < 0:
        omega += 2 * np.pi
    return CircleArc(np.zeros(3), float(r), e1, e2, 0.0, omega)


def make_c_curve(ray: Ray, K: ObstacleSet | float) -> ClosedCurve:
    """Chord of the enclosing ball along the ray, closed by the shorter great-circle arc."""
    r = K.enclosing_radius if isinstance(K, ObstacleSet) else float(K)
    p_in, p_out, d = chord_endpoints(ray.base, ray.direction, r)
    if d[0] >= r:
        raise NoIntersection(f"ray with impact parameter {d[0]:g} misses the ball of radius {r:g}")
    p_in, p_out = p_in[0], p_out[0]
    return ClosedCurve((Segment(p_in, p_out), _return_arc(p_out, p_in, r, ray.direction)))


# ---------------------------------------------------------------------------
# linking


def _gauss_sum(r1, t1, r2, t2):
    """Gauss linking sums for node batches ``r1: (m, n1, 3)`` against ``r2: (n2, 3)``.

    Tangents carry their quadrature weights. Returns the raw values and the
    minimum node separation per batch row.
    """
    m, n1, _ = r1.shape
    out = np.zeros(m)
    sep = np.full(m, np.inf)
    rows = max(1, 2_000_000 // (n1 * len(r2)))
    for s in range(0, m, rows):
        a = r1[s : s + rows]
        ta = t1[s : s + rows]
        d = a[:, :, None, :] - r2[None, None, :, :]
        dist = np.sqrt(np.einsum("...i,...i->...", d, d))
        cross = np.cross(ta[:, :, None, :], t2[None, None, :, :])
        out[s : s + rows] = np.einsum("mijk,mijk->m", d, cross / (dist**3)[..., None])
        sep[s : s + rows] = dist.reshape(len(a), -1).min(axis=1)
    return out / (4.0 * np.pi), sep


@dataclass(frozen=True)
class LinkResult:
    value: int
    raw: float

    def __int__(self):
        return self.value


def _round_link(raw: float) -> int:
    n = int(np.rint(raw))
    if abs(raw - n) > INTEGER_TOL:
        raise NonIntegerLink(raw)
    return n


def linking_number(c1: ClosedCurve, c2: ClosedCurve) -> LinkResult:
    """Gauss linking number of two disjoint closed curves."""
    s1, s2 = c1.sample(64), c2.sample(64)
    diameter = np.ptp(np.vstack([s1, s2]), axis=0).max()
    gap = np.sqrt(((s1[:, None, :] - s2[None, :, :]) ** 2).sum(-1)).min()
    if gap < 1e-6 * diameter:
        raise CurvesTooClose(f"curves come within {gap:.3e} of each other")
    panels = 1
    prev = None
    while True:
        r1, t1 = c1.nodes(panels)
        r2, t2 = c2.nodes(panels)
        raw, sep = _gauss_sum(r1[None], t1[None], r2, t2)
        if sep[0] < 1e-6 * diameter:
            raise CurvesTooClose(f"curves come within {sep[0]:.3e} of each other")
        raw = float(raw[0])
        if prev is not None and abs(raw - prev) < LINK_CHANGE_TOL:
            return LinkResult(_round_link(raw), raw)
        if panels >= LINK_MAX_PANELS:
            return LinkResult(_round_link(raw), raw)
        prev = raw
        panels *= 2


# ---------------------------------------------------------------------------
# classification


OUTSIDE = "Outside"
THROUGH_HOLE = "ThroughHole"
BLOCKED = "Blocked"


@dataclass(frozen=True)
class LineClass:
    """Hole class of a line; ``hole`` is a 0-based torus index."""

    tag: str
    hole: int | None = None
    sign: int = 0
    linking: tuple = ()
    raw: tuple = ()

    @property
    def key(self):
        return (self.hole, self.sign) if self.tag == THROUGH_HOLE else self.tag

    def __eq__(self, other):
        if not isinstance(other, LineClass):
            return NotImplemented
        return (self.tag, self.hole, self.sign, self.linking) == (other.tag, other.hole, other.sign, other.linking)

    def __hash__(self):
        return hash((self.tag, self.hole, self.sign, self.linking))


def _class_from_links(links: Sequence[int], raw: Sequence[float]) -> LineClass:
    links = tuple(int(n) for n in links)
    nz = [j for j, n in enumerate(links) if n != 0]
    if not nz:
        return LineClass(OUTSIDE, linking=links, raw=tuple(raw))
    if len(nz) > 1 or abs(links[nz[0]]) != 1:
        raise UnsupportedTopology(f"linking vector {links} is outside the single-hole regime")
    j = nz[0]
    return LineClass(THROUGH_HOLE, j, links[j], links, tuple(raw))


def classify_ray(ray: Ray, K: ObstacleSet) -> LineClass:
    if not ray_in_exterior(ray, K):
        return LineClass(BLOCKED)
    zeros = (0,) * len(K.tori)
    if np.linalg.norm(ray.transverse) >= K.enclosing_radius:
        return LineClass(OUTSIDE, linking=zeros, raw=(0.0,) * len(K.tori))
    c = make_c_curve(ray, K)
    res = [linking_number(c, t.core_circle()) for t in K.tori]
    return _class_from_links([x.value for x in res], [x.raw for x in res])


def _c_nodes(points, direction, r, panels):
    """Quadrature nodes of the c-curves of many parallel lines, batched."""
    p_in, p_out, d = chord_endpoints(points, direction, r)
    t, w = composite_rule(panels, LINK_ORDER)
    chord = p_in[:, None, :] + t[None, :, None] * (p_out - p_in)[:, None, :]
    chord_t = (p_out - p_in)[:, None, :] * w[None, :, None]
    e1 = p_out / r
    q = p_in - np.sum(p_in * e1, axis=1)[:, None] * e1
    nq = np.linalg.norm(q, axis=1)
    degenerate = nq < 1e-12 * r
    if np.any(degenerate):
        h = orthonormal_frame(direction)[0]
        hq = h - (e1[degenerate] @ h)[:, None] * e1[degenerate]
        q[degenerate] = hq
        nq[degenerate] = np.linalg.norm(hq, axis=1)
    e2 = q / nq[:, None]
    omega = np.arctan2(np.sum(p_in * e2, axis=1), np.sum(p_in * e1, axis=1)) % (2 * np.pi)
    s = omega[:, None] * t[None, :]
    arc = r * (np.cos(s)[..., None] * e1[:, None, :] + np.sin(s)[..., None] * e2[:, None, :])
    arc_t = (r * omega)[:, None, None] * (-np.sin(s)[..., None] * e1[:, None, :] + np.cos(s)[..., None] * e2[:, None, :])
    arc_t = arc_t * w[None, :, None]
    return np.concatenate([chord, arc], axis=1), np.concatenate([chord_t, arc_t], axis=1)


def linking_vectors(points, direction, K: ObstacleSet):
    """Raw Gauss integrals of the c-curves of exterior lines with every core circle.

    Lines missing the enclosing ball get zeros. Returns ``(m, n_tori)`` raw values.
    """
    x = np.atleast_2d(np.asarray(points, dtype=float))
    v = unit(direction)
    r = K.enclosing_radius
    raw = np.zeros((len(x), len(K.tori)))
    _, _, d = chord_endpoints(x, v, r)
    inside = np.flatnonzero(d < r)
    for j, tor in enumerate(K.tori):
        circle = tor.core_circle()
        active = inside.copy()
        prev = None
        panels = 1
        while active.size:
            r1, t1 = _c_nodes(x[active], v, r, panels)
            r2, t2 = circle.nodes(panels)
            cur, _ = _gauss_sum(r1, t1, r2, t2)
            if prev is not None:
                done = np.abs(cur - prev) < LINK_CHANGE_TOL
                if panels >= LINK_MAX_PANELS:
                    done[:] = True
                raw[active[done], j] = cur[done]
                active = active[~done]
                cur = cur[~done]
            prev = cur
            panels *= 2
    return raw


def classify_rays(points, direction, K: ObstacleSet) -> list[LineClass]:
    """Batched :func:`classify_ray` for parallel lines."""
    x = np.atleast_2d(np.asarray(points, dtype=float))
    v = unit(direction)
    ext = rays_exterior(x, v, K)
    out: list[LineClass] = [LineClass(BLOCKED)] * len(x)
    idx = np.flatnonzero(ext)
    if idx.size:
        raw = linking_vectors(x[idx], v, K)
        for k, i in enumerate(idx):
            out[i] = _class_from_links([_round_link(z) for z in raw[k]], raw[k])
    return out


def tube_disjointness(K: ObstacleSet, direction) -> bool:
    """Conservative check that the obstacle shadows along ``direction`` keep tori apart.

    Each torus is replaced by the disc of radius ``a + b`` around its
    projected center and each ball by its projected disc. Torus/torus and
    torus/ball pairs must have disjoint discs.
    """
    v = unit(direction)

    def proj(p):
        return p - (p @ v) * v

    for i, t in enumerate(K.tori):
        others = list(K.tori[i + 1 :]) + list(K.balls)
        for o in others:
            if np.linalg.norm(proj(t.center) - proj(o.center)) <= t.bounding_radius + o.bounding_radius:
                return False
    return True
