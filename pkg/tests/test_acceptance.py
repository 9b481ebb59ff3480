"""One test per acceptance criterion; each records a PASS/FAIL line shown in the terminal summary."""
import json
import time
import warnings
from pathlib import Path

import numpy as np
import pytest

from abscatter.cli import main
from abscatter.errors import ResolutionInsufficient
from abscatter.fields import (
    FluxAssignment,
    ab_potential,
    add_integer_flux,
    circulation,
    exact_coulomb_potential,
    gaussian_potential,
    loop_potential_field,
    make_test_bump_field,
    wrap_phase,
)
from abscatter.geometry import ObstacleSet, Ray, Torus, classify_ray, clearance, linking_number, make_c_curve, orthonormal_frame
from abscatter.interference import fringe_period, tilted_pattern, two_beam_pattern
from abscatter.io import read_csv
from abscatter.reconstruction import PlaneGrid, partition_packet, reconstruct_B, reconstruct_V, recover_fluxes
from abscatter.scattering import WavePacket, apply_S_leading
from abscatter.xray import phase_factors, xray_a, xray_a_batch, xray_transverse_B_batch

from . import conftest
from .conftest import random_unit

EXAMPLE = Path(__file__).resolve().parents[1] / "scenarios" / "single_torus.json"


def report(number: int, title: str, ok: bool, detail: str):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number:2d}: {title} ({detail})"
    conftest.ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def two_tori():
    return ObstacleSet(
        (Torus([0, 0, 0], 1.0, 0.3), Torus([3.5, 0.0, 0.0], 0.8, 0.2, [0.0, 1.0, 0.0])), (), 6.0
    )


def single_torus(r=3.0):
    return ObstacleSet((Torus([0, 0, 0], 1.0, 0.3),), (), r)


def sample_rays(K, rng, n, pred):
    out = []
    while len(out) < n:
        v = random_unit(rng)
        ray = Ray(rng.uniform(-2.0, 2.0, 3), v)
        cls = classify_ray(ray, K)
        if pred(cls):
            out.append(ray)
    return out


def test_ampere_matrix():
    t0 = time.perf_counter()
    K = two_tori()
    M = np.array([[circulation(loop_potential_field(j, K), K.tori[k].flux_loop()) for j in range(2)] for k in range(2)])
    dt = time.perf_counter() - t0
    err = np.abs(M - np.eye(2)).max()
    report(1, "Ampere matrix is the identity", err <= 1e-6 and dt < 5.0, f"max |M - I| = {err:.2e}, {dt:.1f} s")


def test_hole_xray_values():
    t0 = time.perf_counter()
    rng = np.random.default_rng(2)
    K = single_torus()
    A = ab_potential(FluxAssignment((2.0,)), K)
    hole = sample_rays(K, rng, 20, lambda c: c.tag == "ThroughHole" and c.sign == 1)
    other = sample_rays(K, rng, 20, lambda c: c.tag == "Outside")
    e_hole = max(abs(xray_a(A, r, K=K).value - 2.0) for r in hole)
    e_out = max(abs(xray_a(A, r, K=K).value) for r in other)
    dt = time.perf_counter() - t0
    ok = e_hole <= 1e-4 and e_out <= 1e-4 and dt < 30.0
    report(2, "hole rays give 2.0, other rays 0", ok, f"hole err {e_hole:.2e}, outside err {e_out:.2e}, {dt:.1f} s")


def test_mod_two_pi_invariance():
    rng = np.random.default_rng(3)
    K = single_torus()
    A = ab_potential(FluxAssignment((0.6,)), K)
    A3 = add_integer_flux(A, [3], K)
    rays = sample_rays(K, rng, 30, lambda c: c.tag != "Blocked")
    diff = max(abs(phase_factors(A3, r.base, r.direction, K=K)[0] - phase_factors(A, r.base, r.direction, K=K)[0]) for r in rays)
    report(3, "integer flux leaves exp(i a) unchanged", diff < 1e-6, f"max change {diff:.2e} over {len(rays)} rays")


def test_gradient_identity():
    t0 = time.perf_counter()
    K = ObstacleSet((Torus([0, 0, 0], 1.0, 0.3),), (), 6.0)
    B = make_test_bump_field([3.0, 3.0, 1.0], 0.8, 1.0, K, direction=[1.0, 1.0, 0.5])
    A = exact_coulomb_potential(B)
    v = np.array([0.2, -0.3, 1.0]) / np.linalg.norm([0.2, -0.3, 1.0])
    e1, e2 = orthonormal_frame(v)
    s = np.linspace(-0.7, 0.7, 10)
    c = np.array([3.0, 3.0, 1.0])
    pts = np.array([c + a * e1 + b * e2 for a in s for b in s])
    h = 1e-4
    grad = np.zeros_like(pts)
    for e in (e1, e2):
        ap, _ = xray_a_batch(A, pts + h * e, v, 1e-12)
        am, _ = xray_a_batch(A, pts - h * e, v, 1e-12)
        grad += ((ap - am) / (2 * h))[:, None] * e
    wb, _ = xray_transverse_B_batch(B, pts, v, 1e-12)
    rel = np.linalg.norm(grad - wb) / np.linalg.norm(wb)
    worst = np.abs(grad - wb).max() / np.abs(wb).max()
    dt = time.perf_counter() - t0
    report(4, "gradient of a equals transverse field integral", rel <= 1e-2 and worst <= 1e-2 and dt < 120.0,
           f"relative L2 {rel:.2e}, worst {worst:.2e}, {dt:.1f} s")


@pytest.mark.slow
def test_b_reconstruction_round_trip():
    t0 = time.perf_counter()
    K = ObstacleSet((Torus([0, 0, 0], 1.0, 0.3),), (), 6.0)
    B = make_test_bump_field([3.0, 3.0, 1.0], 0.8, 1.0, K, direction=[1.0, 1.0, 0.5])
    region = PlaneGrid([3.0, 3.0, 1.0], [1, 0, 0], [0, 1, 0], 128, 1.0)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", ResolutionInsufficient)
        rec = reconstruct_B(exact_coulomb_potential(B), region, K, n_angles=180)
    dt = time.perf_counter() - t0
    truth = B(region.nodes().reshape(-1, 3)).reshape(128, 128, 3)
    m = rec.mask
    err = np.linalg.norm(rec.values[m] - truth[m]) / np.linalg.norm(truth[m])
    note = " with sampling warning" if caught else ""
    report(5, "B phantom round trip at N=128, M=180", err <= 0.10 and dt < 600.0 and m.any(),
           f"relative L2 {err:.2%}{note}, mask {m.mean():.0%}, {dt:.0f} s")


def test_v_reconstruction_round_trip():
    K = ObstacleSet((Torus([0, 0, 0], 1.0, 0.3),), (), 6.0)
    V = gaussian_potential([3.0, 3.0, 1.0], 0.25, 1.0)
    region = PlaneGrid([3.0, 3.0, 1.0], [1, 0, 0], [0, 1, 0], 128, 1.0)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ResolutionInsufficient)
        rec = reconstruct_V(V, region, K, n_angles=180)
    truth = V(region.nodes().reshape(-1, 3)).reshape(128, 128)
    err = np.linalg.norm(rec.values - truth) / np.linalg.norm(truth)
    report(6, "V phantom round trip at N=128, M=180", err <= 0.10, f"relative L2 {err:.2%}")


def test_flux_recovery():
    K = single_torus()
    z = np.array([0.0, 0.0, 1.0])
    pk = WavePacket.bump(z, [0, 0, 0], 0.5, n=64, spacing=0.09375, lobes=[[0, 0], [2, 0]])
    part = partition_packet(pk, K)
    worst_f = worst_l = 0.0
    for phi in (0.5, np.pi, 2 * np.pi + 0.5, -1.0):
        res = recover_fluxes(apply_S_leading(ab_potential(FluxAssignment((phi,)), K), z, pk, K), pk, part)
        worst_f = max(worst_f, abs(wrap_phase(res.torus_fluxes(1)[0] - wrap_phase(phi))))
        worst_l = max(worst_l, abs(res.lambda_phase))
    report(7, "fluxes recovered modulo 2 pi", worst_f <= 1e-3 and worst_l <= 1e-3,
           f"flux err {worst_f:.2e} rad, lambda phase {worst_l:.2e} rad")


def test_destructive_interference():
    z = np.array([0.0, 0.0, 1.0])
    beam = WavePacket.gaussian(z, [0, 0, 0], 0.5, n=64)
    single = np.abs(beam.amplitude) ** 2
    dark = two_beam_pattern(np.pi, beam).intensity.max()
    bright = np.array_equal(two_beam_pattern(0.0, beam).intensity, 4.0 * single)
    v0, m = 0.6 * beam.e1, 10.0
    tp = tilted_pattern(0.0, v0, m, beam)
    row = beam.n // 2
    amp2 = single[:, row]
    core = np.flatnonzero(amp2 > 1e-6 * amp2.max())
    line = tp.intensity[core, row] / amp2[core]
    x = np.arange(beam.n)[core] * beam.spacing
    peaks = [i for i in range(1, len(core) - 1) if line[i] > line[i - 1] and line[i] >= line[i + 1]]
    period = (x[peaks[-1]] - x[peaks[0]]) / (len(peaks) - 1)
    perr = abs(period - fringe_period(v0, m))
    report(8, "destructive interference at theta = pi", dark < 1e-10 and bright and perr <= beam.spacing,
           f"max I(pi) = {dark:.1e}, I(0) = 4 I1: {bright}, period err {perr:.3f} vs cell {beam.spacing:.3f}")


def _numeric_tables(out: Path):
    tables = {}
    for p in sorted(out.glob("*.csv")):
        _, header, rows = read_csv(p)
        vals = []
        for r in rows:
            for cell in r:
                for part in cell.split(";"):
                    try:
                        vals.append(float(part))
                    except ValueError:
                        pass
        tables[p.name] = np.array(vals)
    return tables


def test_gauge_invariance_cli(tmp_path):
    data = json.loads(EXAMPLE.read_text())
    data["region"]["n"] = 8
    data["angles"] = 16
    plain = tmp_path / "plain.json"
    plain.write_text(json.dumps(data))
    data["gauge"] = {"model": "bump", "center": [1.5, 1.5, 0.5], "radius": 2.5, "amplitude": 3.0}
    shifted = tmp_path / "shifted.json"
    shifted.write_text(json.dumps(data))
    codes = []
    for sc, out in ((plain, tmp_path / "a"), (shifted, tmp_path / "b")):
        for cmd in ("linking", "xray", "reconstruct-b", "reconstruct-v", "fluxes", "interference"):
            codes.append(main([cmd, "--scenario", str(sc), "--out", str(out)]))
    ta, tb = _numeric_tables(tmp_path / "a"), _numeric_tables(tmp_path / "b")
    worst = 0.0
    same_shape = ta.keys() == tb.keys() and all(ta[k].shape == tb[k].shape for k in ta)
    if same_shape:
        worst = max(float(np.abs(ta[k] - tb[k]).max(initial=0.0)) for k in ta)
    ok = all(c == 0 for c in codes) and same_shape and worst <= 1e-8
    report(9, "compact gauge shift leaves CLI outputs unchanged", ok, f"{len(ta)} tables, max diff {worst:.1e}")


def test_linking_integrality():
    rng = np.random.default_rng(10)
    worst = 0.0
    count = 0
    while count < 200:
        a = rng.uniform(0.6, 1.5)
        b = rng.uniform(0.1, 0.45) * a
        tor = Torus(rng.uniform(-0.5, 0.5, 3), a, b, random_unit(rng))
        K = ObstacleSet((tor,), (), 4.0)
        v = random_unit(rng)
        x = rng.uniform(-1.5, 1.5, 3)
        if clearance(x, v, K)[0] < 0.1 * b:
            continue
        res = linking_number(make_c_curve(Ray(x, v), K), tor.core_circle())
        worst = max(worst, abs(res.raw - round(res.raw)))
        count += 1
    report(10, "raw Gauss integrals are integers", worst <= 0.01, f"worst distance {worst:.2e} over {count} configurations")
