"""Delimited text, PGM and sidecar files stamped with a scenario hash."""
from __future__ import annotations

import csv
import hashlib
import json
from pathlib import Path

import numpy as np

HASH_PREFIX = "# scenario_hash="


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=True)


def scenario_hash(obj) -> str:
    return hashlib.sha256(canonical_json(obj).encode()).hexdigest()


def fmt(x, digits: int = 12) -> str:
    """Stable text for a float; negative zero prints as zero."""
    x = float(x) + 0.0
    if x == 0.0:
        return "0"
    return f"{x:.{digits}g}"


def write_csv(path, header, rows, digest: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        fh.write(f"{HASH_PREFIX}{digest}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([fmt(v) if isinstance(v, (float, np.floating)) else v for v in r])
    return path


def read_csv(path):
    with open(path, newline="") as fh:
        first = fh.readline().rstrip("\n")
        digest = first[len(HASH_PREFIX):] if first.startswith(HASH_PREFIX) else None
        rows = list(csv.reader(fh))
    return digest, rows[0], rows[1:]


def write_sidecar(path, meta: dict, digest: str) -> Path:
    path = Path(path)
    data = {**meta, "scenario_hash": digest}
    path.write_text(json.dumps(data, sort_keys=True, indent=2) + "\n")
    return path


def read_hash(path) -> str | None:
    """Scenario hash embedded in a CSV, PGM or JSON sidecar written by this package."""
    path = Path(path)
    text = path.read_text()
    if path.suffix == ".json":
        return json.loads(text).get("scenario_hash")
    for line in text.splitlines()[:3]:
        if line.startswith(HASH_PREFIX):
            return line[len(HASH_PREFIX):].strip()
    return None


def write_pgm(path, values: np.ndarray, scale: float, digest: str, maxval: int = 65535) -> Path:
    """ASCII P2 image; ``values / scale`` is mapped to 0..maxval, rows are the first array index."""
    v = np.asarray(values, dtype=float)
    levels = np.zeros(v.shape, dtype=int) if scale <= 0 else np.clip(np.rint(maxval * v / scale), 0, maxval).astype(int)
    lines = ["P2", f"{HASH_PREFIX}{digest}", f"{v.shape[1]} {v.shape[0]}", str(maxval)]
    lines += [" ".join(str(k) for k in row) for row in levels]
    path = Path(path)
    path.write_text("\n".join(lines) + "\n")
    return path


def read_pgm(path) -> np.ndarray:
    tokens = []
    for line in Path(path).read_text().splitlines():
        if line.startswith("#"):
            continue
        tokens.extend(line.split())
    if tokens[0] != "P2":
        raise ValueError("not an ASCII PGM file")
    w, h, _ = int(tokens[1]), int(tokens[2]), int(tokens[3])
    return np.array([int(t) for t in tokens[4 : 4 + w * h]]).reshape(h, w)


def packet_rows(amplitude):
    n1, n2 = amplitude.shape
    for i in range(n1):
        for j in range(n2):
            a = amplitude[i, j]
            yield i, j, float(a.real), float(a.imag)
