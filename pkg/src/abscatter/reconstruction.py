"""Inversion: Radon transforms, field and potential tomography, flux recovery.

Magnetic-field reconstruction never touches raw phases. Per line it forms
the gauge-invariant ratio of phase factors against an anchor line that
misses the enclosing ball, differentiates across neighbouring parallel
lines to get ``int v x B``, and reads off ``n.int B`` (the cross product
identity ``((n x d) x d) = -n`` for unit ``d`` in the plane orthogonal to
``n``). Each family of parallel planes then yields one component of B by
filtered back-projection.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DegenerateFrame, EmptyPart, ResolutionInsufficient, SupportTouchesObstacle
from .fields import MagneticFieldModel, PotentialField, ScalarPotentialModel, wrap_phase
from .geometry import BLOCKED, THROUGH_HOLE, ObstacleSet, classify_rays, orthonormal_frame, unit
from .quadrature import Decay, Support, line_integrals
from .scattering import WavePacket, inner_product, next_order_matrix_element
from .xray import grad_from_phase_ratios, phase_factors, xray_a_batch, xray_V_batch

OUT = "out"
MIN_PART_MASS = 1e-6


# ---------------------------------------------------------------------------
# grids and sinograms


@dataclass(frozen=True)
class PlaneGrid:
    """Cell-centred ``n x n`` lattice on the square of half-width ``half_width`` in the plane (u, w)."""

    center: np.ndarray
    u: np.ndarray
    w: np.ndarray
    n: int
    half_width: float

    def __post_init__(self):
        u = unit(self.u)
        w = np.asarray(self.w, dtype=float)
        w = unit(w - (w @ u) * u)
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "center", np.asarray(self.center, dtype=float).reshape(3))
        if self.n < 2 or not self.half_width > 0:
            raise ConfigError("plane grid needs n >= 2 and a positive half-width")

    @property
    def spacing(self) -> float:
        return 2.0 * self.half_width / self.n

    @property
    def normal(self) -> np.ndarray:
        return np.cross(self.u, self.w)

    def coords(self) -> np.ndarray:
        return -self.half_width + (np.arange(self.n) + 0.5) * self.spacing

    def nodes(self) -> np.ndarray:
        c = self.coords()
        return self.center + c[:, None, None] * self.u + c[None, :, None] * self.w


@dataclass(frozen=True)
class ReconstructionGrid:
    grid: PlaneGrid
    values: np.ndarray
    mask: np.ndarray


@dataclass(frozen=True)
class SinogramPlane:
    """Line integrals over lines ``s w_m + t d_m`` with ``d_m = (cos t_m, sin t_m)``, ``w_m = (-sin t_m, cos t_m)``."""

    angles: np.ndarray
    offsets: np.ndarray
    data: np.ndarray
    u: np.ndarray | None = None
    w: np.ndarray | None = None
    origin: np.ndarray | None = None

    def __post_init__(self):
        M, P = len(self.angles), len(self.offsets)
        if M < 2 or P < 2:
            raise ConfigError("a sinogram needs at least two angles and two offsets")
        if np.shape(self.data) != (M, P):
            raise ConfigError(f"sinogram data shape {np.shape(self.data)} does not match {(M, P)}")
        if not np.all(np.isfinite(self.data)):
            raise ConfigError("sinogram data must be finite")
        ds = np.diff(self.offsets)
        if not np.allclose(ds, ds[0], rtol=1e-9, atol=0):
            raise ConfigError("offsets must be uniformly spaced")

    @property
    def offset_spacing(self) -> float:
        return float(self.offsets[1] - self.offsets[0])


def uniform_angles(M: int) -> np.ndarray:
    return np.pi * np.arange(M) / M


def centered_offsets(radius: float, spacing: float) -> np.ndarray:
    k = int(np.ceil(radius / spacing))
    return spacing * np.arange(-k, k + 1)


def line_frame(theta):
    c, s = np.cos(theta), np.sin(theta)
    return np.array([c, s]), np.array([-s, c])


def radon_2d(f, angles, offsets, *, support: Support | None = None, decay: Decay | None = None, tol: float = 1e-10) -> SinogramPlane:
    """Line integrals of a planar function ``f((n, 2)) -> (n,)``."""
    angles = np.asarray(angles, dtype=float)
    offsets = np.asarray(offsets, dtype=float)
    data = np.zeros((len(angles), len(offsets)))
    for m, th in enumerate(angles):
        d, w = line_frame(th)
        vals, _ = line_integrals(f, offsets[:, None] * w, d, tol, support=support, decay=decay)
        data[m] = vals
    return SinogramPlane(angles, offsets, data)


def ramp_filter(data: np.ndarray, spacing: float) -> np.ndarray:
    """Convolve each row with the band-limited (Ram-Lak) ramp kernel at the offset Nyquist frequency."""
    P = data.shape[-1]
    n = np.arange(-(P - 1), P)
    h = np.zeros(len(n))
    h[n == 0] = 1.0 / (4.0 * spacing**2)
    odd = n % 2 == 1
    h[odd] = -1.0 / (np.pi**2 * n[odd] ** 2 * spacing**2)
    L = 1 << int(np.ceil(np.log2(3 * P - 2)))
    conv = np.fft.irfft(np.fft.rfft(data, L, axis=-1) * np.fft.rfft(h, L), L, axis=-1)
    return spacing * conv[..., P - 1 : 2 * P - 1]


def fbp_invert(s: SinogramPlane, points, grid_n: int | None = None) -> np.ndarray:
    """Filtered back-projection at planar points ``(n, 2)`` with linear interpolation.

    ``grid_n`` (the side of the target lattice) enables the ``M >= pi N/2``
    sampling warning.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    M = len(s.angles)
    if grid_n is not None and M < np.pi * grid_n / 2.0:
        warnings.warn(
            f"{M} angles is below pi*N/2 = {np.pi * grid_n / 2:.0f} for an N={grid_n} grid",
            ResolutionInsufficient,
            stacklevel=2,
        )
    q = ramp_filter(np.asarray(s.data, dtype=float), s.offset_spacing)
    out = np.zeros(len(pts))
    for m, th in enumerate(s.angles):
        _, w = line_frame(th)
        out += np.interp(pts @ w, s.offsets, q[m], left=0.0, right=0.0)
    return out * np.pi / M


def fbp_invert_grid(s: SinogramPlane, grid: PlaneGrid) -> ReconstructionGrid:
    c = grid.coords()
    pts = np.stack(np.meshgrid(c, c, indexing="ij"), axis=-1).reshape(-1, 2)
    vals = fbp_invert(s, pts, grid.n).reshape(grid.n, grid.n)
    return ReconstructionGrid(grid, vals, np.ones((grid.n, grid.n), dtype=bool))


# ---------------------------------------------------------------------------
# planes versus obstacle


def plane_meets_obstacle(point, normal, K: ObstacleSet) -> bool:
    """Exact test whether the plane through ``point`` with unit ``normal`` meets K."""
    n = unit(normal)
    for t in K.tori:
        d0 = n @ (t.center - point)
        spread = t.major_radius * np.sqrt(max(0.0, 1.0 - (n @ t.axis) ** 2))
        lo, hi = d0 - spread, d0 + spread
        gap = 0.0 if lo <= 0.0 <= hi else min(abs(lo), abs(hi))
        if gap <= t.minor_radius:
            return True
    for b in K.balls:
        if abs(n @ (b.center - point)) <= b.radius:
            return True
    return False


def phase_source(A: PotentialField, tol: float = 1e-10):
    """Phase-factor callable ``(points, direction) -> exp(i a)`` backed by a potential."""

    def phase(points, direction):
        return phase_factors(A, points, direction, tol)

    return phase


def _anchor(direction, K: ObstacleSet):
    e1, _ = orthonormal_frame(direction)
    return 1.5 * K.enclosing_radius * e1


def default_frames(region: PlaneGrid):
    """Plane families with normals (region normal, u, w); each frame is ``(u_j, v_j)``."""
    n, u, w = region.normal, region.u, region.w
    return [(u, w), (w, n), (n, u)]


def frame_normals(frames) -> np.ndarray:
    normals = []
    for u, v in frames:
        u, v = unit(u), unit(v)
        if abs(u @ v) > 1e-9:
            raise ConfigError("reconstruction frame vectors must be orthogonal")
        normals.append(np.cross(u, v))
    N = np.array(normals)
    if N.shape != (3, 3) or abs(np.linalg.det(N)) < 1e-6:
        det = np.linalg.det(N) if N.shape == (3, 3) else 0.0
        raise DegenerateFrame(f"plane normals are not independent (det = {det:.2e})")
    return N


def _plane_groups(nodes, center, normal, scale):
    off = (nodes - center) @ normal
    key = np.round(off / (1e-9 * scale)).astype(np.int64)
    uniq, inv = np.unique(key, return_inverse=True)
    groups = []
    for g in range(len(uniq)):
        idx = np.flatnonzero(inv == g)
        groups.append((float(off[idx].mean()), idx))
    return groups


def family_sinograms(source, center, u, v, offsets_n, angles, offsets, K: ObstacleSet, h: float, integrand="field"):
    """Sinograms for a family of parallel planes sharing the in-plane basis (u, v).

    ``integrand='field'`` derives ``n.int B`` from phase factors; ``'scalar'``
    uses the source values directly. Returns an array ``(planes, M, P)``.
    """
    n = np.cross(u, v)
    P = len(offsets)
    p0 = center[None, :] + np.asarray(offsets_n)[:, None] * n
    data = np.zeros((len(p0), len(angles), P))
    for m, th in enumerate(angles):
        d = np.cos(th) * u + np.sin(th) * v
        w = -np.sin(th) * u + np.cos(th) * v
        base = p0[:, None, :] + offsets[None, :, None] * w
        if integrand == "scalar":
            data[:, m, :] = np.asarray(source(base.reshape(-1, 3), d)).reshape(len(p0), P)
            continue
        pts = np.concatenate([base, base + h * w, base - h * w]).reshape(-1, 3)
        pts = np.vstack([pts, _anchor(d, K)])
        f = np.asarray(source(pts, d))
        ref = np.conj(f[-1])
        R = (f[:-1] * ref).reshape(3, len(p0), P)
        data[:, m, :] = -grad_from_phase_ratios(R[1], R[2], R[0], h)
    return data


def reconstruct_B(
    source,
    region: PlaneGrid,
    K: ObstacleSet,
    frames=None,
    n_angles: int = 180,
    h: float | None = None,
    sinogram_radius: float | None = None,
    offset_spacing: float | None = None,
    tol: float = 1e-10,
) -> ReconstructionGrid:
    """Magnetic field on a planar region from phase-factor data.

    ``source`` is a :class:`PotentialField` or a callable returning
    ``exp(i a)`` for ``(points, direction)``. Only ratios of phase factors
    are used. Nodes whose plane in some family meets K are masked out.
    """
    if isinstance(source, PotentialField):
        source = phase_source(source, tol)
    frames = default_frames(region) if frames is None else [(unit(a), unit(b)) for a, b in frames]
    N = frame_normals(frames)
    h = 1e-3 * region.half_width if h is None else h
    radius = region.half_width * np.sqrt(2.0) if sinogram_radius is None else sinogram_radius
    ds = region.spacing if offset_spacing is None else offset_spacing
    offsets = centered_offsets(radius, ds)
    angles = uniform_angles(n_angles)
    nodes = region.nodes().reshape(-1, 3)
    comps = np.zeros((len(nodes), 3))
    mask = np.ones(len(nodes), dtype=bool)
    warned = False
    for j, (u, v) in enumerate(frames):
        n = N[j]
        groups = _plane_groups(nodes, region.center, n, region.half_width)
        ok = []
        for off, idx in groups:
            if plane_meets_obstacle(region.center + off * n, n, K):
                mask[idx] = False
            else:
                ok.append((off, idx))
        if not ok:
            continue
        data = family_sinograms(source, region.center, u, v, [o for o, _ in ok], angles, offsets, K, h)
        for k, (off, idx) in enumerate(ok):
            p0 = region.center + off * n
            rel = nodes[idx] - p0
            sino = SinogramPlane(angles, offsets, data[k], u, v, p0)
            with warnings.catch_warnings(record=True) as caught:
                warnings.simplefilter("always")
                comps[idx, j] = fbp_invert(sino, np.stack([rel @ u, rel @ v], axis=1), region.n)
            if caught and not warned:
                warnings.warn(caught[0].message, ResolutionInsufficient, stacklevel=2)
                warned = True
    B = np.linalg.solve(N, comps.T).T
    B[~mask] = 0.0
    return ReconstructionGrid(region, B.reshape(region.n, region.n, 3), mask.reshape(region.n, region.n))


def xray_V_source(V: ScalarPotentialModel, tol: float = 1e-10):
    def source(points, direction):
        vals, _ = xray_V_batch(V, points, direction, tol)
        return vals

    return source


def matrix_element_source(A: PotentialField, V: ScalarPotentialModel, B: MagneticFieldModel, K: ObstacleSet | None = None, *, width: float = 0.02, n: int = 33, mass: float = 1.0, tol: float = 1e-10):
    """Line integrals of V extracted from next-order matrix elements of narrow packets.

    For each line a compact packet of radius ``width`` centred on it is
    scattered; the transverse-field terms are subtracted and the remainder
    is divided by ``-i exp(i a) (phi0, phi0)``.
    """

    def source(points, direction):
        pts = np.atleast_2d(points)
        out = np.zeros(len(pts))
        a0, _ = xray_a_batch(A, pts, direction, tol)
        for k, p in enumerate(pts):
            pk = WavePacket.bump(direction, p, width, n=n, spacing=2.0 * width / (n - 1))
            t = next_order_matrix_element(A, V, direction, pk, pk, B=B, mass=mass, K=K, tol=tol, terms=True)
            norm = inner_product(pk, pk)
            out[k] = np.real(t.potential_term / (-1j * np.exp(1j * a0[k]) * norm))
        return out

    return source


def reconstruct_V(
    source,
    region: PlaneGrid,
    K: ObstacleSet,
    n_angles: int = 180,
    sinogram_radius: float | None = None,
    offset_spacing: float | None = None,
    tol: float = 1e-10,
) -> ReconstructionGrid:
    """Electric potential on the region plane from line-integral data of V.

    ``source`` is a :class:`ScalarPotentialModel` or a callable
    ``(points, direction) -> int V``.
    """
    if isinstance(source, ScalarPotentialModel):
        source = xray_V_source(source, tol)
    n = region.normal
    if plane_meets_obstacle(region.center, n, K):
        return ReconstructionGrid(region, np.zeros((region.n, region.n)), np.zeros((region.n, region.n), dtype=bool))
    radius = region.half_width * np.sqrt(2.0) if sinogram_radius is None else sinogram_radius
    ds = region.spacing if offset_spacing is None else offset_spacing
    offsets = centered_offsets(radius, ds)
    angles = uniform_angles(n_angles)
    data = family_sinograms(source, region.center, region.u, region.w, [0.0], angles, offsets, K, 0.0, integrand="scalar")
    sino = SinogramPlane(angles, offsets, data[0], region.u, region.w, region.center)
    rec = fbp_invert_grid(sino, region)
    return rec


def plane_sinogram(source, region: PlaneGrid, frame, offset: float, K: ObstacleSet, n_angles=180, h=None, sinogram_radius=None, offset_spacing=None, tol=1e-10) -> SinogramPlane:
    """The ``n.int B`` sinogram of one plane, as used inside :func:`reconstruct_B`."""
    if isinstance(source, PotentialField):
        source = phase_source(source, tol)
    u, v = unit(frame[0]), unit(frame[1])
    h = 1e-3 * region.half_width if h is None else h
    radius = region.half_width * np.sqrt(2.0) if sinogram_radius is None else sinogram_radius
    ds = region.spacing if offset_spacing is None else offset_spacing
    offsets = centered_offsets(radius, ds)
    angles = uniform_angles(n_angles)
    data = family_sinograms(source, region.center, u, v, [offset], angles, offsets, K, h)
    n = np.cross(u, v)
    return SinogramPlane(angles, offsets, data[0], u, v, region.center + offset * n)


# ---------------------------------------------------------------------------
# holes and fluxes


@dataclass(frozen=True)
class HolePartition:
    """Node labels (``'out'``, a ``(torus, sign)`` pair, or None off the support) and sub-packets."""

    labels: np.ndarray
    parts: dict = field(default_factory=dict)

    def masses(self) -> dict:
        return {k: p.mass() for k, p in self.parts.items()}


def partition_packet(phi0: WavePacket, K: ObstacleSet) -> HolePartition:
    support = phi0.support()
    idx = np.argwhere(support)
    labels = np.full(support.shape, None, dtype=object)
    if idx.size == 0:
        return HolePartition(labels, {})
    pts = phi0.nodes()[idx[:, 0], idx[:, 1]]
    classes = classify_rays(pts, phi0.direction, K)
    blocked = [k for k, c in enumerate(classes) if c.tag == BLOCKED]
    if blocked:
        raise SupportTouchesObstacle(idx[blocked])
    for (i, j), c in zip(idx, classes):
        labels[i, j] = (c.hole, c.sign) if c.tag == THROUGH_HOLE else OUT
    parts = {}
    for key in dict.fromkeys(labels[support].tolist()):
        key = tuple(key) if isinstance(key, list) else key
        m = np.zeros(support.shape, dtype=bool)
        for i, j in idx:
            if labels[i, j] == key:
                m[i, j] = True
        parts[key] = phi0.with_amplitude(np.where(m, phi0.amplitude, 0.0), part=str(key))
    return HolePartition(labels, parts)


@dataclass(frozen=True)
class FluxRecovery:
    hole_fluxes: dict
    lambda_phase: float

    def torus_fluxes(self, n_tori: int) -> list:
        """Per torus, the flux oriented like its flux loop, in (-pi, pi]; None if no hole of it was sampled."""
        out = [None] * n_tori
        for (j, s), F in self.hole_fluxes.items():
            out[j] = wrap_phase(s * F)
        return out


def recover_fluxes(S_out: WavePacket, phi0: WavePacket, partition: HolePartition) -> FluxRecovery:
    if OUT not in partition.parts:
        raise EmptyPart("the packet has no part outside the holes to fix the reference phase")
    for key, p in partition.parts.items():
        if p.mass() <= MIN_PART_MASS:
            raise EmptyPart(f"part {key} has mass {p.mass():.2e}")
    out = partition.parts[OUT]
    lam = float(np.angle(inner_product(S_out, out) / out.mass()))
    fluxes = {}
    for key, p in partition.parts.items():
        if key == OUT:
            continue
        fluxes[key] = wrap_phase(float(np.angle(inner_product(S_out, p) / p.mass())) - lam)
    return FluxRecovery(fluxes, wrap_phase(lam))


def closed_loop_flux(x, y, v, w, A: PotentialField, K: ObstacleSet | None = None, tol: float = 1e-10) -> float:
    """Circulation of A around the loop made of the two lines, reduced to (-pi, pi]."""
    v, w = unit(v), unit(w)
    if v @ w < 0.0:
        raise ConfigError("closed-loop flux needs directions with non-negative inner product")
    ax, _ = xray_a_batch(A, x, v, tol, K)
    ay, _ = xray_a_batch(A, y, w, tol, K)
    return wrap_phase(float(ax[0] - ay[0]))
