"""Strict INI-style run configuration.

Sections and keys are whitelisted: an unknown key is an error, a missing
required key is an error, and documented defaults exist only for tolerances
and sampler sizes, never for physical parameters. The resolved configuration
(defaults filled in) can be echoed back to disk and re-parses to itself.
"""

from __future__ import annotations

import configparser
import hashlib
import io
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from . import augmenting, geometry, operators
from .errors import ConfigError

# key -> (type tag, default or REQUIRED, help)
REQUIRED = object()

_SCHEMA: Dict[str, Dict[str, tuple]] = {
    "operator": {
        "family": ("str", REQUIRED),
        "n": ("int", REQUIRED),
        "k": ("int", 0),
        "l": ("int", 0),
        "alpha": ("float", 1.0),
        "eps": ("float", 0.0),
    },
    "augmenting": {
        "family": ("str", "Zero"),
        "a_diag": ("floats", ()),
        "a0": ("float", 1.0),
    },
    "rhs": {
        "family": ("str", "Constant"),
        "value": ("float", 1.0),
        "phi_tilde": ("float", 1.0),
        "b0": ("float", 1.0),
        "beta": ("float", 1.0),
    },
    "domain": {
        "shape": ("str", "Disk"),
        "radius": ("float", 1.0),
        "a": ("float", 1.0),
        "b": ("float", 1.0),
        "rho0": ("float", 1.0),
        "cos_coeffs": ("floats", ()),
        "sin_coeffs": ("floats", ()),
    },
    "boundary": {
        "family": ("str", "Neumann"),
        "phi": ("float", REQUIRED),
        "phi_z": ("float", 0.0),
        "theta": ("float", 0.5),
    },
    "solver": {
        "grid": ("str", "PolarDisk"),
        "n_r": ("int", 33),
        "n_theta": ("int", 64),
        "square_side": ("float", 2.0),
        "n_x": ("int", 33),
        "n_y": ("int", 33),
        "continuation_steps": ("int", 16),
        "newton_max_iter": ("int", 30),
        "residual_tolerance": ("float", 1e-9),
        "admissibility_floor": ("float", 1e-8),
        "min_continuation_step": ("float", 1.0 / 1024.0),
        "seed_c0": ("float", 1.0),
        "seed_eps": ("float", 0.5),
        "seed_x0": ("floats", (0.0, 0.0)),
        "eps_schedule": ("floats", ()),
        "degenerate_alpha": ("float", 64.0),
        "manufactured": ("str", "none"),
        "comparison_offset": ("float", 0.0),
    },
    "certify": {
        "samples": ("int", 1000),
        "seed": ("int", 0),
        "conditions": ("strs", ("F1", "F2", "F5")),
        "eig_box": ("floats", (-1.0, 3.0)),
        "margin_floor": ("float", 1e-6),
        "band": ("floats", (0.5, 2.0)),
        "z_min": ("float", -1.0),
        "z_max": ("float", 1.0),
        "p_max": ("float", 20.0),
        "boundary_count": ("int", 256),
        "z_count": ("int", 16),
        "points": ("int", 40),
    },
    "probe": {
        "pairs": ("str", "2,2;3,2;3,3;4,3;5,3"),
        "points": ("int", 1000),
        "c": ("float", 1.0),
        "tolerance": ("float", 1e-9),
    },
    "output": {
        "figures": ("bool", True),
    },
}

_SECTION_ORDER = ("operator", "augmenting", "rhs", "domain", "boundary",
                  "solver", "certify", "probe", "output")


def _parse_value(raw: str, kind: str, where: str):
    raw = raw.strip()
    try:
        if kind == "str":
            return raw
        if kind == "int":
            return int(raw)
        if kind == "float":
            return float(raw)
        if kind == "bool":
            if raw.lower() in ("true", "yes", "1", "on"):
                return True
            if raw.lower() in ("false", "no", "0", "off"):
                return False
            raise ValueError(raw)
        if kind == "floats":
            if not raw:
                return ()
            return tuple(float(v) for v in raw.replace(";", ",").split(",") if v.strip())
        if kind == "strs":
            if not raw:
                return ()
            return tuple(v.strip() for v in raw.split(",") if v.strip())
    except ValueError as ex:
        raise ConfigError(f"cannot parse {where} = {raw!r} as {kind}", location=where) from ex
    raise ConfigError(f"unknown value kind {kind}", location=where)


def _format_value(value, kind: str) -> str:
    if kind == "floats":
        return ",".join(repr(float(v)) for v in value)
    if kind == "strs":
        return ",".join(value)
    if kind == "bool":
        return "true" if value else "false"
    if kind == "float":
        return repr(float(value))
    return str(value)


@dataclass
class RunConfig:
    """Resolved configuration: every known key has a value."""

    sections: Dict[str, Dict[str, object]] = field(default_factory=dict)

    def get(self, section: str, key: str):
        return self.sections[section][key]

    # -- parsing --------------------------------------------------------------

    @staticmethod
    def parse(text: str, require: Tuple[str, ...] = ()) -> "RunConfig":
        cp = configparser.ConfigParser(inline_comment_prefixes=("#",),
                                       interpolation=None)
        cp.optionxform = str.lower
        try:
            cp.read_string(text)
        except configparser.Error as ex:
            raise ConfigError(f"config parse error: {ex}") from ex

        sections: Dict[str, Dict[str, object]] = {}
        for name in cp.sections():
            if name not in _SCHEMA:
                raise ConfigError(f"unknown section [{name}]", location=name)
            schema = _SCHEMA[name]
            out = {}
            for key, raw in cp.items(name):
                if key not in schema:
                    raise ConfigError(f"unknown key {key!r} in section [{name}]",
                                      location=f"{name}.{key}")
                kind, _ = schema[key]
                out[key] = _parse_value(raw, kind, f"{name}.{key}")
            sections[name] = out

        resolved: Dict[str, Dict[str, object]] = {}
        for name in _SECTION_ORDER:
            schema = _SCHEMA[name]
            given = sections.get(name, {})
            out = {}
            for key, (kind, default) in schema.items():
                if key in given:
                    out[key] = given[key]
                elif default is REQUIRED:
                    if name in require:
                        raise ConfigError(
                            f"missing required key {key!r} in section [{name}]",
                            location=f"{name}.{key}")
                    out[key] = None
                else:
                    out[key] = default
            resolved[name] = out
        return RunConfig(sections=resolved)

    @staticmethod
    def load(path: str, require: Tuple[str, ...] = ()) -> "RunConfig":
        with open(path, "r", encoding="utf-8") as fh:
            return RunConfig.parse(fh.read(), require=require)

    # -- canonical echo ---------------------------------------------------------

    def dump(self) -> str:
        """Canonical text form; re-parsing reproduces this byte-for-byte."""
        out = io.StringIO()
        for name in _SECTION_ORDER:
            out.write(f"[{name}]\n")
            schema = _SCHEMA[name]
            for key in sorted(schema):
                kind, _ = schema[key]
                value = self.sections[name][key]
                if value is None:
                    continue
                out.write(f"{key} = {_format_value(value, kind)}\n")
            out.write("\n")
        return out.getvalue()

    def sha256(self) -> str:
        return hashlib.sha256(self.dump().encode()).hexdigest()

    # -- object construction ------------------------------------------------

    def build_operator(self) -> operators.OperatorSpec:
        sec = self.sections["operator"]
        fam = (sec["family"] or "").strip()
        n = sec["n"]
        if fam is None or n is None:
            raise ConfigError("[operator] needs family and n")
        k, l, alpha = sec["k"], sec["l"], sec["alpha"]
        builders = {
            "fk": lambda: operators.fk(k, n),
            "fkl": lambda: operators.fkl(k, l, n),
            "logdet": lambda: operators.log_det(n),
            "logpk": lambda: operators.log_pk(k, n),
            "tildefk": lambda: operators.tilde_fk(k, n),
            "fknegalpha": lambda: operators.fk_neg_alpha(k, alpha, n),
            "mk": lambda: operators.mk(k, n),
        }
        key = fam.lower()
        if key not in builders:
            raise ConfigError(f"unknown operator family {fam!r} "
                              f"(CLI families: {sorted(builders)})",
                              location="operator.family")
        op = builders[key]()
        if sec["eps"]:
            op = operators.regularized(op, sec["eps"])
        return op

    def build_augmenting(self) -> augmenting.AugMatrixSpec:
        sec = self.sections["augmenting"]
        n = self.sections["operator"]["n"]
        fam = sec["family"].lower()
        if fam == "zero":
            return augmenting.ZeroA(n)
        if fam == "euclideanyamabe":
            return augmenting.EuclideanYamabeA(n)
        if fam == "reflector":
            return augmenting.ReflectorA(n)
        if fam == "mainexample":
            diag = sec["a_diag"] or (1.0,) * n
            if len(diag) != n:
                raise ConfigError("a_diag length must equal n",
                                  location="augmenting.a_diag")
            a = np.diag(diag)
            a0 = sec["a0"]
            return augmenting.MainExampleA(n, a=lambda x, z: a,
                                           a0=lambda x, z: a0)
        raise ConfigError(f"unknown augmenting family {sec['family']!r}",
                          location="augmenting.family")

    def build_rhs(self) -> augmenting.RhsSpec:
        sec = self.sections["rhs"]
        n = self.sections["operator"]["n"]
        fam = sec["family"].lower()
        if fam == "constant":
            return augmenting.constant_rhs(n, sec["value"])
        if fam == "transformedyamabe":
            return augmenting.transformed_yamabe_rhs(n, lambda x: sec["phi_tilde"])
        if fam == "exponential":
            return augmenting.exponential_rhs(n, sec["b0"], sec["beta"])
        raise ConfigError(f"unknown rhs family {sec['family']!r}",
                          location="rhs.family")

    def build_domain(self) -> geometry.Domain2D:
        sec = self.sections["domain"]
        shape = sec["shape"].lower()
        if shape == "disk":
            return geometry.Disk(sec["radius"])
        if shape == "ellipse":
            return geometry.Ellipse(sec["a"], sec["b"])
        if shape == "smoothclosed":
            return geometry.SmoothClosed(sec["rho0"], sec["cos_coeffs"],
                                         sec["sin_coeffs"])
        raise ConfigError(f"unknown domain shape {sec['shape']!r}",
                          location="domain.shape")

    def build_boundary(self, domain: geometry.Domain2D) -> geometry.BoundaryOpSpec:
        sec = self.sections["boundary"]
        if sec["phi"] is None:
            raise ConfigError("missing required key 'phi' in section [boundary]",
                              location="boundary.phi")
        phi0, phiz = sec["phi"], sec["phi_z"]

        def phi(x, z):
            return phi0 + phiz * z

        fam = sec["family"].lower()
        if fam == "neumann":
            return geometry.Neumann(domain, phi)
        if fam == "semilinearnormalized":
            return geometry.SemilinearNormalized(domain, phi)
        if fam == "capillarity":
            theta0 = sec["theta"]
            return geometry.Capillarity(domain, lambda x: theta0, phi)
        raise ConfigError(f"unknown boundary family {sec['family']!r}",
                          location="boundary.family")

    def rng(self, seed_override: Optional[int] = None) -> np.random.Generator:
        seed = self.sections["certify"]["seed"] if seed_override is None else seed_override
        return np.random.default_rng(np.random.PCG64(seed))
