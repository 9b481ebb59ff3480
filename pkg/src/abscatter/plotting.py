"""PNG figures for CLI reports (headless, reproducible bytes)."""
from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

_META = {"Software": None}


def _save(fig, path) -> Path:
    path = Path(path)
    fig.savefig(path, dpi=100, metadata=_META)
    plt.close(fig)
    return path


def image(path, values, title: str, extent=None, cmap: str = "viridis", label: str = "") -> Path:
    fig, ax = plt.subplots(figsize=(5, 4))
    im = ax.imshow(np.asarray(values).T, origin="lower", extent=extent, cmap=cmap)
    fig.colorbar(im, ax=ax, label=label)
    ax.set_title(title)
    return _save(fig, path)


def field_components(path, values, mask, extent, title: str) -> Path:
    """Three panels for the components of a reconstructed vector field."""
    v = np.where(mask[..., None], values, np.nan)
    fig, axes = plt.subplots(1, 3, figsize=(12, 3.6))
    for k, ax in enumerate(axes):
        im = ax.imshow(v[..., k].T, origin="lower", extent=extent, cmap="RdBu_r")
        ax.set_title(f"{title} [{'xyz'[k]}]")
        fig.colorbar(im, ax=ax, shrink=0.8)
    fig.tight_layout()
    return _save(fig, path)


def sinogram(path, data, title: str) -> Path:
    fig, ax = plt.subplots(figsize=(5, 4))
    im = ax.imshow(np.asarray(data), aspect="auto", origin="lower", cmap="magma")
    ax.set_xlabel("offset index")
    ax.set_ylabel("angle index")
    ax.set_title(title)
    fig.colorbar(im, ax=ax)
    return _save(fig, path)


def phase_map(path, amplitude, title: str) -> Path:
    a = np.asarray(amplitude)
    ph = np.where(np.abs(a) > 1e-12, np.angle(a), np.nan)
    return image(path, ph, title, cmap="twilight", label="phase [rad]")
