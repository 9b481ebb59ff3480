"""High-velocity scattering of wave packets.

A packet is separable: a complex transverse amplitude on a square lattice
orthogonal to the beam direction times a real Gaussian longitudinal
profile. To leading order the scattering operator multiplies each transverse
node by ``exp(i a)``; the next-order matrix element adds the line integral
of the electric potential and two terms built from the transverse magnetic
field, whose momentum operators act through finite differences.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from scipy.integrate import cumulative_simpson

from .errors import ConfigError, GridMismatch, GridTooCoarse, SupportTouchesObstacle, TailBoundUnavailable
from .fields import MagneticFieldModel, PotentialField, ScalarPotentialModel
from .geometry import ObstacleSet, orthonormal_frame, rays_exterior, unit
from .xray import xray_a_batch, xray_V_batch

SUPPORT_THRESHOLD = 1e-12
GRID_TOL = 1e-12


@dataclass(frozen=True)
class WavePacket:
    """Transverse amplitude ``amplitude[i, j]`` at ``origin + i*spacing*e1 + j*spacing*e2``."""

    direction: np.ndarray
    origin: np.ndarray
    e1: np.ndarray
    e2: np.ndarray
    spacing: float
    amplitude: np.ndarray
    sigma_par: float = 1.0
    ell0: float = 0.0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        v = unit(self.direction)
        e1 = unit(self.e1)
        e2 = unit(self.e2)
        if abs(e1 @ v) > 1e-9 or abs(e2 @ v) > 1e-9 or abs(e1 @ e2) > 1e-9:
            raise ConfigError("packet basis must be orthonormal and transverse to the direction")
        amp = np.asarray(self.amplitude, dtype=complex)
        if amp.ndim != 2 or amp.shape[0] != amp.shape[1]:
            raise ConfigError("packet amplitude must be a square 2D array")
        if not self.spacing > 0:
            raise ConfigError("grid spacing must be positive")
        object.__setattr__(self, "direction", v)
        object.__setattr__(self, "e1", e1)
        object.__setattr__(self, "e2", e2)
        object.__setattr__(self, "origin", np.asarray(self.origin, dtype=float).reshape(3))
        object.__setattr__(self, "amplitude", amp)

    @property
    def n(self) -> int:
        return self.amplitude.shape[0]

    def nodes(self) -> np.ndarray:
        k = np.arange(self.n) * self.spacing
        return self.origin + k[:, None, None] * self.e1 + k[None, :, None] * self.e2

    def support(self) -> np.ndarray:
        return np.abs(self.amplitude) > SUPPORT_THRESHOLD

    def mass(self) -> float:
        return float(np.sum(np.abs(self.amplitude) ** 2) * self.spacing**2)

    def with_amplitude(self, amplitude, **meta) -> "WavePacket":
        return replace(self, amplitude=np.asarray(amplitude, dtype=complex), meta={**self.meta, **meta})

    def same_grid(self, other: "WavePacket") -> bool:
        return (
            self.amplitude.shape == other.amplitude.shape
            and abs(self.spacing - other.spacing) <= GRID_TOL * self.spacing
            and all(
                np.allclose(a, b, rtol=0, atol=GRID_TOL * max(1.0, self.spacing * self.n))
                for a, b in ((self.origin, other.origin), (self.e1, other.e1), (self.e2, other.e2), (self.direction, other.direction))
            )
        )

    def longitudinal(self, ell) -> np.ndarray:
        """Normalized Gaussian profile ``g``, with ``int g^2 = 1``."""
        s = self.sigma_par
        return (np.pi * s * s) ** -0.25 * np.exp(-((np.asarray(ell) - self.ell0) ** 2) / (2 * s * s))

    @classmethod
    def _grid(cls, direction, center, n, spacing, e1):
        v = unit(direction)
        if e1 is None:
            e1, e2 = orthonormal_frame(v)
        else:
            e1 = unit(e1)
            e2 = np.cross(v, e1)
        c = np.asarray(center, dtype=float)
        c = c - (c @ v) * v
        origin = c - 0.5 * (n - 1) * spacing * (e1 + e2)
        return v, origin, e1, e2

    @classmethod
    def from_profile(cls, profile, direction, center, n, spacing, e1=None, sigma_par=1.0, ell0=0.0, normalize=True, **meta):
        """Sample ``profile(xi1, xi2)`` (transverse offsets from the center) on an n x n grid."""
        v, origin, e1, e2 = cls._grid(direction, center, n, spacing, e1)
        k = (np.arange(n) - 0.5 * (n - 1)) * spacing
        amp = np.asarray(profile(k[:, None] + 0 * k[None, :], 0 * k[:, None] + k[None, :]), dtype=complex)
        amp = np.where(np.abs(amp) > SUPPORT_THRESHOLD * np.abs(amp).max(initial=0.0), amp, 0.0)
        pk = cls(v, origin, e1, e2, float(spacing), amp, float(sigma_par), float(ell0), meta)
        if normalize:
            m = pk.mass()
            if m == 0.0:
                raise ConfigError("packet profile vanishes on the grid")
            pk = pk.with_amplitude(amp / np.sqrt(m))
        return pk

    @classmethod
    def gaussian(cls, direction, center, width, n=64, spacing=None, offset=(0.0, 0.0), **kw):
        """Normalized Gaussian of transverse width ``width``; by default the grid spans 16 widths."""
        spacing = 16.0 * width / n if spacing is None else spacing
        o1, o2 = offset
        return cls.from_profile(
            lambda a, b: np.exp(-((a - o1) ** 2 + (b - o2) ** 2) / (2 * width**2)), direction, center, n, spacing, shape="gaussian", width=width, **kw
        )

    @classmethod
    def bump(cls, direction, center, radius, n=64, spacing=None, offset=(0.0, 0.0), lobes=None, **kw):
        """Normalized ``(1 - r^2/R^2)^4`` profile, exactly zero outside radius R.

        ``lobes`` lists transverse offsets of several equal bumps (default one at ``offset``).
        """
        spacing = 4.0 * radius / n if spacing is None else spacing
        lobes = [offset] if lobes is None else lobes

        def prof(a, b):
            total = 0.0
            for o1, o2 in lobes:
                s = ((a - o1) ** 2 + (b - o2) ** 2) / radius**2
                total = total + np.where(s < 1.0, (1.0 - s) ** 4, 0.0)
            return total

        return cls.from_profile(prof, direction, center, n, spacing, shape="bump", radius=radius, **kw)


def inner_product(phi: WavePacket, psi: WavePacket) -> complex:
    """``sum conj(psi) phi spacing^2``."""
    if not phi.same_grid(psi):
        raise GridMismatch("packets live on different grids")
    return complex(np.sum(np.conj(psi.amplitude) * phi.amplitude) * phi.spacing**2)


def _check_direction(direction, packet):
    v = unit(direction)
    if np.linalg.norm(v - packet.direction) > 1e-12:
        raise ConfigError("scattering direction differs from the packet direction")
    return v


def support_nodes_exterior(packet: WavePacket, K: ObstacleSet | None):
    """Support node indices, raising if any of their lines meets the obstacle."""
    idx = np.argwhere(packet.support())
    if K is not None and idx.size:
        pts = packet.nodes()[idx[:, 0], idx[:, 1]]
        ok = rays_exterior(pts, packet.direction, K)
        if not np.all(ok):
            raise SupportTouchesObstacle(idx[~ok])
    return idx


def phase_grid(A: PotentialField, packet: WavePacket, K: ObstacleSet | None = None, tol: float = 1e-10) -> np.ndarray:
    """``a(v, node)`` on the support nodes, zero elsewhere."""
    idx = support_nodes_exterior(packet, K)
    a = np.zeros(packet.amplitude.shape)
    if idx.size:
        pts = packet.nodes()[idx[:, 0], idx[:, 1]]
        vals, _ = xray_a_batch(A, pts, packet.direction, tol)
        a[idx[:, 0], idx[:, 1]] = vals
    return a


def apply_S_leading(A: PotentialField, direction, phi0: WavePacket, K: ObstacleSet | None = None, tol: float = 1e-10) -> WavePacket:
    """Leading high-velocity action: multiply each node by ``exp(i a)``.

    The O(1/v) remainder is not modeled.
    """
    _check_direction(direction, phi0)
    a = phase_grid(A, phi0, K, tol)
    return phi0.with_amplitude(np.exp(1j * a) * phi0.amplitude, potential=A.gauge_tag, scattered=True)


# ---------------------------------------------------------------------------
# next order


def _shift(f, k, axis):
    """``f`` shifted by k nodes along axis with zero fill (``out[i] = f[i + k]``)."""
    out = np.zeros_like(f)
    n = f.shape[axis]
    src = [slice(None)] * f.ndim
    dst = [slice(None)] * f.ndim
    if k > 0:
        src[axis] = slice(k, n)
        dst[axis] = slice(0, n - k)
    else:
        src[axis] = slice(0, n + k)
        dst[axis] = slice(-k, n)
    out[tuple(dst)] = f[tuple(src)]
    return out


def central_diff(f, h, axis, order=4):
    if order == 2:
        return (_shift(f, 1, axis) - _shift(f, -1, axis)) / (2 * h)
    if order == 6:
        d = 45 * (_shift(f, 1, axis) - _shift(f, -1, axis)) - 9 * (_shift(f, 2, axis) - _shift(f, -2, axis))
        return (d + _shift(f, 3, axis) - _shift(f, -3, axis)) / (60 * h)
    return (-_shift(f, 2, axis) + 8 * _shift(f, 1, axis) - 8 * _shift(f, -1, axis) + _shift(f, -2, axis)) / (12 * h)


@dataclass(frozen=True)
class NextOrderTerms:
    potential_term: complex
    xi_minus: complex
    xi_plus: complex

    @property
    def total(self) -> complex:
        return self.potential_term + self.xi_minus + self.xi_plus


def _line_range(B: MagneticFieldModel, pts, v, tol):
    if B.support is not None:
        c, R = B.support.center, B.support.radius
        tc = (c - pts) @ v
        return tc.min() - R, tc.max() + R
    if B.decay is not None:
        T = B.decay.tail_radius(tol)
        tc = -(pts @ v)
        return tc.min() - T, tc.max() + T
    raise TailBoundUnavailable("magnetic field has neither support nor decay envelope")


def _simpson_weights(n: int, h: float) -> np.ndarray:
    w = np.ones(n)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return w * h / 3.0


def xi_coefficients(B: MagneticFieldModel, packet: WavePacket, idx, n_line: int = 2049, tol: float = 1e-10):
    """Profile-averaged coefficients of the two transverse-field terms.

    For each support node returns ``(F_minus, Q_minus, F_plus, Q_plus)``,
    averaged against ``g^2``. Here ``W_-(s) = int_{-inf}^s v x B``,
    ``W_+(s) = int_s^inf v x B``, ``F_- (l) = -int_{-inf}^l W_-``,
    ``F_+(l) = int_l^inf W_+`` and ``Q_-+`` integrate ``|W_-+|^2`` the
    same way.
    """
    v = packet.direction
    pts = packet.nodes()[idx[:, 0], idx[:, 1]]
    m = len(pts)
    zeros3 = np.zeros((m, 3))
    if B.support is not None and B.support.radius == 0.0:
        return zeros3, np.zeros(m), zeros3, np.zeros(m)
    lo, hi = _line_range(B, pts, v, tol)
    s8 = 8.0 * packet.sigma_par
    lo = min(lo, packet.ell0 - s8)
    hi = max(hi, packet.ell0 + s8)
    s = np.linspace(lo, hi, n_line)
    ds = s[1] - s[0]
    g2 = packet.longitudinal(s) ** 2
    g2 /= _simpson_weights(n_line, ds) @ g2
    # averaging against g^2 folds into fixed kernels on the line
    C = cumulative_simpson(g2, dx=ds, initial=0.0)
    M1 = cumulative_simpson(s * g2, dx=ds, initial=0.0)
    k_plus = s * C - M1
    k_minus = (M1[-1] - M1) - s * (C[-1] - C)
    wq = _simpson_weights(n_line, ds)
    out = [np.zeros((m, 3)), np.zeros(m), np.zeros((m, 3)), np.zeros(m)]
    rows = max(1, 200_000 // n_line)
    for a in range(0, m, rows):
        p = pts[a : a + rows]
        y = p[:, None, :] + s[None, :, None] * v
        b = np.cross(v, B.evaluator(y.reshape(-1, 3))).reshape(y.shape)
        Wm = cumulative_simpson(b, dx=ds, axis=1, initial=0.0)
        Wp = Wm[:, -1:, :] - Wm
        out[0][a : a + rows] = -np.einsum("s,rsk->rk", wq * k_minus, b)
        out[2][a : a + rows] = np.einsum("s,rsk->rk", wq * k_plus, b)
        out[1][a : a + rows] = np.einsum("s,rs->r", wq * (C[-1] - C), np.sum(Wm * Wm, axis=2))
        out[3][a : a + rows] = np.einsum("s,rs->r", wq * C, np.sum(Wp * Wp, axis=2))
    return tuple(out)


def _xi_apply(F, Q, T, packet: WavePacket, mass: float, order: int):
    """``(1/2m)[i div(F T) + i F.grad T + Q T]`` with transverse finite differences."""
    h = packet.spacing
    f1 = F @ packet.e1
    f2 = F @ packet.e2
    div = central_diff(f1 * T, h, 0, order) + central_diff(f2 * T, h, 1, order)
    adv = f1 * central_diff(T, h, 0, order) + f2 * central_diff(T, h, 1, order)
    return (1j * div + 1j * adv + Q * T) / (2.0 * mass)


def next_order_matrix_element(
    A: PotentialField,
    V: ScalarPotentialModel,
    direction,
    phi0: WavePacket,
    psi0: WavePacket,
    *,
    B: MagneticFieldModel,
    mass: float = 1.0,
    K: ObstacleSet | None = None,
    tol: float = 1e-10,
    terms: bool = False,
):
    """First velocity correction ``v([S - e^{ia}] phi, psi)`` at high velocity.

    Sum of the potential term ``(-i e^{ia} int V phi0, psi0)`` and the two
    transverse-field terms, the first with ``e^{ia}`` applied after the
    operator and the second with ``e^{ia}`` applied before it. The remainder
    is not modeled.
    """
    _check_direction(direction, phi0)
    if not phi0.same_grid(psi0):
        raise GridMismatch("packets live on different grids")
    idx = support_nodes_exterior(phi0, K)
    support_nodes_exterior(psi0, K)
    shape = phi0.amplitude.shape
    a = phase_grid(A, phi0, None, tol)
    pts = phi0.nodes()[idx[:, 0], idx[:, 1]]
    Vint = np.zeros(shape)
    if idx.size:
        Vint[idx[:, 0], idx[:, 1]], _ = xray_V_batch(V, pts, phi0.direction, tol)
    ea = np.exp(1j * a)
    T = phi0.amplitude
    S = psi0.amplitude
    dA = phi0.spacing**2
    pot = complex(np.sum(np.conj(S) * (-1j) * ea * Vint * T) * dA)

    # coefficients are needed wherever finite differences reach: dilate the support by three nodes
    mask = phi0.support() | psi0.support()
    for _ in range(3):
        grown = mask.copy()
        for ax in (0, 1):
            for k in (1, -1):
                grown |= _shift(mask, k, ax)
        mask = grown
    cidx = np.argwhere(mask)
    Fm_n, Qm_n, Fp_n, Qp_n = xi_coefficients(B, phi0, cidx, tol=tol)
    Fm = np.zeros(shape + (3,))
    Fp = np.zeros(shape + (3,))
    Qm = np.zeros(shape)
    Qp = np.zeros(shape)
    Fm[cidx[:, 0], cidx[:, 1]] = Fm_n
    Fp[cidx[:, 0], cidx[:, 1]] = Fp_n
    Qm[cidx[:, 0], cidx[:, 1]] = Qm_n
    Qp[cidx[:, 0], cidx[:, 1]] = Qp_n

    def xi_terms(order):
        xm = _xi_apply(Fm, Qm, T, phi0, mass, order)
        xp = _xi_apply(Fp, Qp, ea * T, phi0, mass, order)
        t_minus = complex(np.sum(np.conj(S) * (-1j) * ea * xm) * dA)
        t_plus = complex(np.sum(np.conj(S) * (-1j) * xp) * dA)
        return t_minus, t_plus

    m4, p4 = xi_terms(4)
    m6, p6 = xi_terms(6)
    scale = max(abs(m4) + abs(p4), 1e-300)
    err = abs(m6 - m4) + abs(p6 - p4)
    if abs(m4 + p4) > 1e-12 and err > 0.05 * scale:
        raise GridTooCoarse(f"fourth-order differences have an estimated error of {err / scale:.1%}")
    res = NextOrderTerms(pot, m4, p4)
    return res if terms else res.total
