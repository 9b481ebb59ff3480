"""Gauss-Legendre panel rules and batched (improper) line integrals.

Every integral here is refined by panel doubling: a row is accepted once
two successive composite rules agree to the requested absolute tolerance,
and the difference is reported as the error estimate. Rows are refined
independently, so a batch of easy rays does not pay for one hard ray.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import QuadratureFailure, TailBoundUnavailable

#: Points handed to an integrand in a single call.
CHUNK = 400_000


@lru_cache(maxsize=None)
def gauss_legendre(order: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights on [0, 1]."""
    x, w = np.polynomial.legendre.leggauss(order)
    return 0.5 * (x + 1.0), 0.5 * w


@lru_cache(maxsize=None)
def composite_rule(n_panels: int, order: int) -> tuple[np.ndarray, np.ndarray]:
    """Composite Gauss-Legendre rule on [0, 1] with equal panels."""
    x, w = gauss_legendre(order)
    left = np.arange(n_panels)[:, None] / n_panels
    nodes = (left + x[None, :] / n_panels).ravel()
    weights = np.tile(w / n_panels, n_panels)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


@dataclass(frozen=True)
class Decay:
    """Power-law envelope ``|f(x)| <= constant * (1 + |x|)**(-exponent)`` for ``|x| >= radius``."""

    constant: float
    exponent: float
    radius: float

    def __post_init__(self):
        if self.exponent <= 1.0:
            raise ValueError("line integrals need a decay exponent > 1")
        if self.constant < 0 or self.radius < 0:
            raise ValueError("decay constant and radius must be non-negative")

    def tail_radius(self, tol: float) -> float:
        """Smallest T >= radius with both ray tails beyond T bounded by tol."""
        if self.constant == 0.0:
            return self.radius
        p = self.exponent
        t = (2.0 * self.constant / ((p - 1.0) * tol)) ** (1.0 / (p - 1.0)) - 1.0
        return max(self.radius, t)

    def tail_bound(self, T: float) -> float:
        """Bound on the integral over both tails ``|tau| > T`` of a line through the origin's closest point."""
        p = self.exponent
        return 2.0 * self.constant * (1.0 + T) ** (1.0 - p) / (p - 1.0)

    def __add__(self, other: "Decay") -> "Decay":
        p = min(self.exponent, other.exponent)
        return Decay(self.constant + other.constant, p, max(self.radius, other.radius))

    def scaled(self, c: float) -> "Decay":
        return Decay(abs(c) * self.constant, self.exponent, self.radius)


@dataclass(frozen=True)
class Support:
    """Closed ball outside of which a field vanishes identically."""

    center: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", np.asarray(self.center, dtype=float))


def integrate_rows(func, lo, hi, tol, *, order=16, start_panels=2, max_panels=4096, value_shape=()):
    """Integrate ``func(rows, t)`` over ``[lo[r], hi[r]]`` for every row r.

    ``func`` receives the active row indices and a ``(len(rows), k)`` array of
    abscissae and must return values of shape ``(len(rows), k, *value_shape)``.
    """
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    m = lo.shape[0]
    out = np.zeros((m,) + tuple(value_shape))
    err = np.zeros(m)
    active = np.flatnonzero(hi > lo)
    if active.size == 0:
        return out, err

    def evaluate(rows, panels):
        nodes, weights = composite_rule(panels, order)
        length = hi[rows] - lo[rows]
        res = np.empty((rows.size,) + tuple(value_shape))
        per_chunk = max(1, CHUNK // nodes.size)
        for s in range(0, rows.size, per_chunk):
            r = rows[s : s + per_chunk]
            L = length[s : s + per_chunk]
            t = lo[r, None] + L[:, None] * nodes[None, :]
            vals = np.asarray(func(r, t))
            wl = weights[None, :] * L[:, None]
            res[s : s + per_chunk] = np.einsum("rk,rk...->r...", wl, vals)
        return res

    panels = start_panels
    prev = evaluate(active, panels)
    while active.size:
        panels *= 2
        cur = evaluate(active, panels)
        diff = np.abs(cur - prev).reshape(active.size, -1).max(axis=1)
        done = diff <= tol
        out[active[done]] = cur[done]
        err[active[done]] = diff[done]
        active = active[~done]
        prev = cur[~done]
        if active.size and panels >= max_panels:
            raise QuadratureFailure(
                f"{active.size} integral(s) not converged to {tol:g} with {panels} panels "
                f"(worst difference {diff[~done].max():.3e})"
            )
    return out, err


def line_integrals(func, points, direction, tol, *, support=None, decay=None, value_shape=(), order=16):
    """Integrate ``func`` along the full lines ``points[r] + R * direction``.

    Exactly one of ``support`` (compactly supported integrand, integrated
    over the chord of the support ball) or ``decay`` (power-law envelope,
    truncated where the analytic tail bound drops below tol/2) must be given.
    Returns ``(values, error_estimates)``.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    v = np.asarray(direction, dtype=float)
    m, _ = points.shape

    def on_line(base):
        def f(rows, t):
            pts = base[rows, None, :] + t[..., None] * v
            k = t.shape
            vals = np.asarray(func(pts.reshape(-1, pts.shape[-1])))
            return vals.reshape(k + tuple(value_shape))

        return f

    if support is not None:
        c = support.center[: points.shape[1]]
        tc = (c - points) @ v
        d2 = np.sum((points - c) ** 2, axis=1) - tc**2
        half = np.sqrt(np.clip(support.radius**2 - d2, 0.0, None))
        lo, hi = tc - half, tc + half
        return integrate_rows(on_line(points), lo, hi, tol, order=order, start_panels=1, value_shape=value_shape)

    if decay is None:
        raise TailBoundUnavailable("integrand has neither compact support nor a declared decay envelope")
    close = points - np.outer(points @ v, v)
    T = decay.tail_radius(tol / 2.0)
    Rc = max(decay.radius, 1e-12)
    q = tol / 6.0
    if T <= Rc:
        vals, err = integrate_rows(on_line(close), np.full(m, -T), np.full(m, T), q * 3, order=order, value_shape=value_shape)
        return vals, err + decay.tail_bound(T)

    core, e0 = integrate_rows(on_line(close), np.full(m, -Rc), np.full(m, Rc), q, order=order, value_shape=value_shape)
    U = np.log(T / Rc)
    total = core
    errs = e0
    for sign in (1.0, -1.0):
        line = on_line(close)

        def tail(rows, u, line=line, sign=sign):
            sigma = Rc * np.exp(u)
            vals = line(rows, sign * sigma)
            jac = sigma.reshape(sigma.shape + (1,) * len(value_shape))
            return vals * jac

        part, e = integrate_rows(tail, np.zeros(m), np.full(m, U), q, order=order, value_shape=value_shape)
        total = total + part
        errs = errs + e
    return total, errs + decay.tail_bound(T)


def curve_integral(func, curve, tol, *, order=16, max_panels=4096):
    """Work integral of a vector field along a :class:`~abscatter.geometry.ClosedCurve`."""
    total = 0.0
    est = 0.0
    for piece in curve.pieces:

        def f(rows, t, piece=piece):
            r = piece.position(t.ravel())
            dr = piece.tangent(t.ravel())
            vals = np.sum(np.asarray(func(r)) * dr, axis=1)
            return vals.reshape(t.shape)

        val, err = integrate_rows(f, np.zeros(1), np.ones(1), tol / len(curve.pieces), order=order, max_panels=max_panels)
        total += float(val[0])
        est += float(err[0])
    return total, est
