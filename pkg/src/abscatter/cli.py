"""Command-line entry point.

Exit codes: 0 success, 2 usage or configuration error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import re
import sys
import warnings
from pathlib import Path

import numpy as np

from . import plotting
from .errors import ConfigError, NumericalError, ResolutionInsufficient
from .geometry import THROUGH_HOLE, classify_ray, ray_in_exterior
from .interference import CAVEAT, fringe_period, fringe_shift, tilted_pattern, two_beam_pattern
from .io import fmt, packet_rows, read_hash, write_csv, write_pgm, write_sidecar
from .reconstruction import (
    family_sinograms,
    matrix_element_source,
    partition_packet,
    phase_source,
    reconstruct_B,
    reconstruct_V,
    recover_fluxes,
    centered_offsets,
    uniform_angles,
    default_frames,
)
from .scattering import apply_S_leading
from .scenario import Scenario
from .xray import xray_a_batch

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 2, 3


def parse_theta(text: str) -> float:
    """Accept floats and multiples of pi such as ``pi``, ``-pi``, ``0.5pi``, ``3*pi/2``."""
    t = text.strip().lower().replace(" ", "")
    m = re.fullmatch(r"([+-]?(?:\d+(?:\.\d*)?|\.\d+)?)\*?pi(?:/([0-9.]+))?", t)
    if m:
        coef = m.group(1)
        c = 1.0 if coef in ("", "+") else -1.0 if coef == "-" else float(coef)
        d = float(m.group(2)) if m.group(2) else 1.0
        return c * np.pi / d
    try:
        return float(t)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"cannot parse angle {text!r}") from exc


def parse_planes(text: str):
    """``default`` or three frames ``ux,uy,uz,vx,vy,vz`` separated by ``;``."""
    if text == "default":
        return None
    frames = []
    for chunk in text.split(";"):
        vals = [float(x) for x in chunk.split(",")]
        if len(vals) != 6:
            raise argparse.ArgumentTypeError("each plane frame needs six numbers")
        frames.append((np.array(vals[:3]), np.array(vals[3:])))
    if len(frames) != 3:
        raise argparse.ArgumentTypeError("exactly three plane frames are required")
    return frames


def fixed6(x: float) -> str:
    s = f"{x:.6f}"
    return "0.000000" if float(s) == 0.0 else s


def _out_dir(args, sc: Scenario) -> Path:
    out = Path(args.out or sc.data.get("output_dir", "out"))
    out.mkdir(parents=True, exist_ok=True)
    return out


def _check_input_hash(path, sc: Scenario):
    digest = read_hash(path)
    if digest != sc.digest:
        raise ConfigError(f"{path} was produced from a different scenario (hash {digest})")


# ---------------------------------------------------------------------------
# subcommands


def cmd_linking(args, sc: Scenario) -> int:
    K = sc.obstacles()
    rows = []
    for ray in sc.rays():
        cls = classify_ray(ray, K)
        hole = "" if cls.tag != THROUGH_HOLE else str(cls.hole + 1)
        sign = "" if cls.tag != THROUGH_HOLE else f"{cls.sign:+d}"
        links = ";".join(str(k) for k in cls.linking)
        raws = ";".join(fmt(r, 8) for r in cls.raw)
        rows.append([cls.tag, hole, sign, *map(float, ray.base), *map(float, ray.direction), links, raws])
    out = _out_dir(args, sc)
    write_csv(out / "linking.csv", ["tag", "hole", "sign", "px", "py", "pz", "vx", "vy", "vz", "linking", "raw"], rows, sc.digest)
    return EXIT_OK


def cmd_xray(args, sc: Scenario) -> int:
    K = sc.obstacles()
    A = sc.magnetic_potential()
    rows = []
    blocked = []
    for k, ray in enumerate(sc.rays()):
        if not ray_in_exterior(ray, K):
            blocked.append(k)
            continue
        val, err = xray_a_batch(A, ray.base, ray.direction, args.tol)
        rows.append([*map(float, ray.direction), *map(float, ray.transverse), float(val[0]), float(err[0])])
    out = _out_dir(args, sc)
    write_csv(out / "xray.csv", ["vx", "vy", "vz", "px", "py", "pz", "value", "err"], rows, sc.digest)
    meta = {"quantity": "a(v,x)", "caveat": "defined up to gauge; only exp(i a) is physical", "tol": args.tol, "blocked_rays": blocked}
    write_sidecar(out / "xray.json", meta, sc.digest)
    return EXIT_OK


def _grid_rows(values, mask):
    n = values.shape[0]
    for i in range(n):
        for j in range(n):
            v = values[i, j]
            comps = [float(x) for x in np.atleast_1d(v)]
            yield [i, j, *comps, int(mask[i, j])]


def cmd_reconstruct_b(args, sc: Scenario) -> int:
    K = sc.obstacles()
    region = sc.region(args.grid)
    frames = args.planes if args.planes is not None else sc.frames()
    A = sc.magnetic_potential()
    M = sc.angles
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", ResolutionInsufficient)
        rec = reconstruct_B(A, region, K, frames, n_angles=M, tol=args.tol)
    out = _out_dir(args, sc)
    write_csv(out / "b_field.csv", ["i", "j", "bx", "by", "bz", "mask"], _grid_rows(rec.values, rec.mask), sc.digest)
    fr = default_frames(region) if frames is None else frames
    u, v = fr[0]
    sino = family_sinograms(phase_source(A, args.tol), region.center, np.asarray(u, float), np.asarray(v, float), [0.0],
                            uniform_angles(M), centered_offsets(region.half_width * np.sqrt(2), region.spacing), K, 1e-3 * region.half_width)[0]
    write_csv(out / "sinogram.csv", ["angle_index", "offset_index", "value"],
              ([m, p, float(sino[m, p])] for m in range(sino.shape[0]) for p in range(sino.shape[1])), sc.digest)
    meta = {
        "grid": {"center": region.center.tolist(), "u": region.u.tolist(), "w": region.w.tolist(), "n": region.n, "half_width": region.half_width},
        "angles": M,
        "warnings": sorted({str(w.message) for w in caught}),
        "masked_fraction": float(1.0 - rec.mask.mean()),
    }
    write_sidecar(out / "b_field.json", meta, sc.digest)
    hw = region.half_width
    plotting.field_components(out / "b_field.png", rec.values, rec.mask, (-hw, hw, -hw, hw), "reconstructed B")
    plotting.sinogram(out / "sinogram.png", sino, "n.int B, first plane family")
    return EXIT_OK


def cmd_reconstruct_v(args, sc: Scenario) -> int:
    if args.b_file:
        _check_input_hash(args.b_file, sc)
    K = sc.obstacles()
    region = sc.region(args.grid)
    V = sc.electric_potential()
    if args.source == "matrix":
        source = matrix_element_source(sc.magnetic_potential(), V, sc.field(), K, mass=sc.mass, tol=args.tol)
    else:
        source = V
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", ResolutionInsufficient)
        rec = reconstruct_V(source, region, K, n_angles=sc.angles, tol=args.tol)
    out = _out_dir(args, sc)
    write_csv(out / "v_field.csv", ["i", "j", "value", "mask"], _grid_rows(rec.values, rec.mask), sc.digest)
    write_sidecar(out / "v_field.json", {"source": args.source, "angles": sc.angles, "n": region.n,
                                         "warnings": sorted({str(w.message) for w in caught})}, sc.digest)
    hw = region.half_width
    plotting.image(out / "v_field.png", np.where(rec.mask, rec.values, np.nan), "reconstructed V", (-hw, hw, -hw, hw))
    return EXIT_OK


def cmd_fluxes(args, sc: Scenario) -> int:
    K = sc.obstacles()
    A = sc.magnetic_potential()
    phi0 = sc.packet()
    S = apply_S_leading(A, phi0.direction, phi0, K, args.tol)
    part = partition_packet(phi0, K)
    res = recover_fluxes(S, phi0, part)
    per_torus = res.torus_fluxes(len(K.tori))
    rows = [[f"F_{j + 1}", "" if F is None else fixed6(F)] for j, F in enumerate(per_torus)]
    rows.append(["lambda_phase", fixed6(res.lambda_phase)])
    out = _out_dir(args, sc)
    write_csv(out / "fluxes.csv", ["name", "value"], rows, sc.digest)
    write_csv(out / "packet_out.csv", ["i", "j", "re", "im"], packet_rows(S.amplitude), sc.digest)
    write_sidecar(out / "packet_out.json", {
        "origin": S.origin.tolist(), "e1": S.e1.tolist(), "e2": S.e2.tolist(), "spacing": S.spacing,
        "direction": S.direction.tolist(), "caveat": "leading high-velocity order",
        "parts": {str(k): v for k, v in sorted((str(k), m) for k, m in part.masses().items())},
    }, sc.digest)
    plotting.phase_map(out / "packet_phase.png", S.amplitude, "scattered packet phase")
    return EXIT_OK


def cmd_interference(args, sc: Scenario) -> int:
    cfg = sc.interference()
    theta = args.theta if args.theta is not None else float(cfg["theta"])
    phi = sc.packet()
    pat = two_beam_pattern(theta, phi)
    out = _out_dir(args, sc)
    scale = pat.max_intensity
    write_pgm(out / "pattern.pgm", pat.intensity, scale, sc.digest)
    write_csv(out / "pattern.csv", ["i", "j", "value"], ([i, j, float(pat.intensity[i, j])] for i in range(phi.n) for j in range(phi.n)), sc.digest)
    meta = {"theta": theta, "caveat": CAVEAT, "scale": scale}
    v0 = np.asarray(cfg["tilt"], dtype=float)
    if np.linalg.norm(v0) > 0:
        tp = tilted_pattern(theta, v0, cfg["mass_scale"], phi)
        write_pgm(out / "tilted.pgm", tp.intensity, tp.max_intensity, sc.digest)
        meta["fringe_period"] = fringe_period(v0, cfg["mass_scale"])
        meta["fringe_shift_vs_zero_flux"] = fringe_shift(0.0, theta, v0, cfg["mass_scale"])
        plotting.image(out / "tilted.png", tp.intensity, f"tilted reference, theta={theta:.4f}", cmap="gray")
    write_sidecar(out / "pattern.json", meta, sc.digest)
    plotting.image(out / "pattern.png", pat.intensity, f"two-beam intensity, theta={theta:.4f}", cmap="gray")
    return EXIT_OK


def cmd_validate(args, sc: Scenario) -> int:
    for path in args.check or []:
        _check_input_hash(path, sc)
    print(json.dumps({"valid": True, "scenario_hash": sc.digest, "tori": len(sc.obstacles().tori)}))
    return EXIT_OK


COMMANDS = {
    "linking": cmd_linking,
    "xray": cmd_xray,
    "reconstruct-b": cmd_reconstruct_b,
    "reconstruct-v": cmd_reconstruct_v,
    "fluxes": cmd_fluxes,
    "interference": cmd_interference,
    "validate": cmd_validate,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="abscatter", description="Aharonov-Bohm scattering: simulation and inversion")
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--scenario", required=True, help="scenario JSON file")
        s.add_argument("--out", help="output directory (default: scenario output_dir or ./out)")
        s.add_argument("--tol", type=float, default=1e-10, help="line-integral tolerance")
        if name in ("reconstruct-b", "reconstruct-v"):
            s.add_argument("--grid", type=int, help="reconstruction grid side N")
        if name == "reconstruct-b":
            s.add_argument("--planes", type=parse_planes, default=None, help="'default' or three frames 'ux,uy,uz,vx,vy,vz;...'")
        if name == "reconstruct-v":
            s.add_argument("--source", choices=["xray", "matrix"], default="xray")
            s.add_argument("--b-file", help="b_field.csv from reconstruct-b (hash-checked)")
        if name == "interference":
            s.add_argument("--theta", type=parse_theta, default=None, help="flux phase, e.g. 1.2, pi, 0.5pi")
        if name == "validate":
            s.add_argument("--check", nargs="*", help="output files whose scenario hash must match")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        sc = Scenario.load(args.scenario)
        return COMMANDS[args.command](args, sc)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
