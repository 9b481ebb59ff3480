"""Scenario files: JSON validated against a schema, then turned into model objects."""
from __future__ import annotations

import copy
import json
from dataclasses import dataclass
from pathlib import Path

import jsonschema
import numpy as np

from .errors import ConfigError
from .fields import (
    FluxAssignment,
    PotentialField,
    ab_potential,
    add_flux_correction,
    add_integer_flux,
    bump_gauge,
    exact_coulomb_potential,
    gauge_shift,
    gaussian_potential,
    make_test_bump_field,
    zero_field,
    zero_scalar_potential,
)
from .geometry import ObstacleSet, Ray
from .io import scenario_hash
from .reconstruction import PlaneGrid
from .scattering import WavePacket

_VEC = {"type": "array", "items": {"type": "number"}, "minItems": 3, "maxItems": 3}
_POS = {"type": "number", "exclusiveMinimum": 0}

SCHEMA = {
    "type": "object",
    "required": ["obstacles"],
    "additionalProperties": False,
    "properties": {
        "name": {"type": "string"},
        "seed": {"type": "integer"},
        "output_dir": {"type": "string"},
        "obstacles": {
            "type": "object",
            "required": ["enclosing_radius"],
            "additionalProperties": False,
            "properties": {
                "tori": {
                    "type": "array",
                    "items": {
                        "type": "object",
                        "required": ["center", "major", "minor"],
                        "additionalProperties": False,
                        "properties": {"center": _VEC, "major": _POS, "minor": _POS, "axis": _VEC},
                    },
                },
                "balls": {
                    "type": "array",
                    "items": {
                        "type": "object",
                        "required": ["center", "radius"],
                        "additionalProperties": False,
                        "properties": {"center": _VEC, "radius": _POS},
                    },
                },
                "enclosing_radius": _POS,
            },
        },
        "flux": {"type": "array", "items": {"type": "number"}},
        "integer_flux": {"type": "array", "items": {"type": "integer"}},
        "field": {
            "type": "object",
            "required": ["model"],
            "additionalProperties": False,
            "properties": {
                "model": {"enum": ["zero", "bump"]},
                "center": _VEC,
                "radius": _POS,
                "amplitude": {"type": "number"},
                "direction": _VEC,
            },
        },
        "gauge": {
            "type": "object",
            "required": ["model", "center", "radius", "amplitude"],
            "additionalProperties": False,
            "properties": {"model": {"enum": ["bump"]}, "center": _VEC, "radius": _POS, "amplitude": {"type": "number"}},
        },
        "potential": {
            "type": "object",
            "required": ["model"],
            "additionalProperties": False,
            "properties": {"model": {"enum": ["zero", "gaussian"]}, "center": _VEC, "sigma": _POS, "amplitude": {"type": "number"}},
        },
        "packet": {
            "type": "object",
            "required": ["direction", "center", "size"],
            "additionalProperties": False,
            "properties": {
                "shape": {"enum": ["bump", "gaussian"]},
                "direction": _VEC,
                "center": _VEC,
                "size": _POS,
                "n": {"type": "integer", "minimum": 4},
                "spacing": _POS,
                "sigma_par": _POS,
                "lobes": {"type": "array", "items": {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2}, "minItems": 1},
            },
        },
        "rays": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["base", "direction"],
                "additionalProperties": False,
                "properties": {"base": _VEC, "direction": _VEC},
            },
        },
        "region": {
            "type": "object",
            "required": ["center", "u", "w", "half_width"],
            "additionalProperties": False,
            "properties": {"center": _VEC, "u": _VEC, "w": _VEC, "n": {"type": "integer", "minimum": 2}, "half_width": _POS},
        },
        "frames": {"type": "array", "items": {"type": "array", "items": _VEC, "minItems": 2, "maxItems": 2}, "minItems": 3, "maxItems": 3},
        "angles": {"type": "integer", "minimum": 2},
        "mass": _POS,
        "interference": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"theta": {"type": "number"}, "tilt": _VEC, "mass_scale": {"type": "number"}},
        },
    },
}


@dataclass(frozen=True)
class Scenario:
    data: dict
    digest: str
    path: Path | None = None

    @classmethod
    def from_dict(cls, data: dict, path=None) -> "Scenario":
        data = copy.deepcopy(data)
        try:
            jsonschema.validate(data, SCHEMA)
        except jsonschema.ValidationError as exc:
            where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
            raise ConfigError(f"scenario invalid at {where}: {exc.message}") from exc
        sc = cls(data, scenario_hash(data), None if path is None else Path(path))
        sc._cross_check()
        return sc

    @classmethod
    def load(cls, path) -> "Scenario":
        try:
            data = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read scenario {path}: {exc}") from exc
        return cls.from_dict(data, path)

    def _cross_check(self):
        n = len(self.data["obstacles"].get("tori", []))
        for key in ("flux", "integer_flux"):
            if key in self.data and len(self.data[key]) != n:
                raise ConfigError(f"'{key}' has {len(self.data[key])} entries for {n} tori")
        fld = self.data.get("field", {"model": "zero"})
        if fld["model"] == "bump" and not {"center", "radius", "amplitude"} <= fld.keys():
            raise ConfigError("bump field needs center, radius and amplitude")
        pot = self.data.get("potential", {"model": "zero"})
        if pot["model"] == "gaussian" and not {"center", "sigma", "amplitude"} <= pot.keys():
            raise ConfigError("gaussian potential needs center, sigma and amplitude")
        self.obstacles()

    # builders -------------------------------------------------------------

    def obstacles(self) -> ObstacleSet:
        return ObstacleSet.from_dict(self.data["obstacles"])

    def flux(self) -> FluxAssignment:
        n = len(self.data["obstacles"].get("tori", []))
        return FluxAssignment(self.data.get("flux", [0.0] * n))

    def field(self):
        f = self.data.get("field", {"model": "zero"})
        if f["model"] == "zero":
            return zero_field()
        return make_test_bump_field(f["center"], f["radius"], f["amplitude"], self.obstacles(), f.get("direction", [0.0, 0.0, 1.0]))

    def magnetic_potential(self) -> PotentialField:
        """Coulomb potential of the field plus loop corrections fixing the fluxes, then the optional shifts."""
        K = self.obstacles()
        B = self.field()
        if B.tag == "ZeroExterior":
            A = ab_potential(self.flux(), K)
        else:
            A = add_flux_correction(exact_coulomb_potential(B), self.flux(), K)
        g = self.data.get("gauge")
        if g is not None:
            A = gauge_shift(A, bump_gauge(g["center"], g["radius"], g["amplitude"]))
        if "integer_flux" in self.data:
            A = add_integer_flux(A, self.data["integer_flux"], K)
        return A

    def field_potential(self) -> PotentialField:
        """Potential whose curl is the scenario field, without flux corrections (for field tomography)."""
        B = self.field()
        if B.tag == "ZeroExterior":
            from .fields import zero_potential

            return zero_potential()
        A = exact_coulomb_potential(B)
        g = self.data.get("gauge")
        if g is not None:
            A = gauge_shift(A, bump_gauge(g["center"], g["radius"], g["amplitude"]))
        return A

    def electric_potential(self):
        p = self.data.get("potential", {"model": "zero"})
        if p["model"] == "zero":
            return zero_scalar_potential()
        return gaussian_potential(p["center"], p["sigma"], p["amplitude"])

    def packet(self) -> WavePacket:
        p = self.data.get("packet")
        if p is None:
            raise ConfigError("scenario has no 'packet' section")
        n = p.get("n", 64)
        kw = {"n": n, "spacing": p.get("spacing"), "sigma_par": p.get("sigma_par", 1.0)}
        if p.get("shape", "bump") == "gaussian":
            return WavePacket.gaussian(p["direction"], p["center"], p["size"], **kw)
        return WavePacket.bump(p["direction"], p["center"], p["size"], lobes=p.get("lobes"), **kw)

    def rays(self) -> list[Ray]:
        return [Ray(r["base"], r["direction"]) for r in self.data.get("rays", [])]

    def region(self, n: int | None = None) -> PlaneGrid:
        r = self.data.get("region")
        if r is None:
            raise ConfigError("scenario has no 'region' section")
        return PlaneGrid(r["center"], r["u"], r["w"], n or r.get("n", 64), r["half_width"])

    def frames(self):
        fr = self.data.get("frames")
        return None if fr is None else [(np.asarray(a, float), np.asarray(b, float)) for a, b in fr]

    @property
    def mass(self) -> float:
        return float(self.data.get("mass", 1.0))

    @property
    def angles(self) -> int:
        return int(self.data.get("angles", 180))

    def interference(self) -> dict:
        return {"theta": 0.0, "tilt": [0.0, 0.0, 0.0], "mass_scale": 1.0, **self.data.get("interference", {})}
