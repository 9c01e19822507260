"""Plain-text experiment configuration: sections, key = value, comments.

The grammar is deliberately flat and diff-friendly:

    # comment
    [section]
    key = value          # values: scalars, or comma lists for boxes

Unknown sections or keys, out-of-range values, and duplicate keys are all
collected and reported together (never first-error-only). Every scenario
ships a complete config file; a minimal file needs only the scenario name,
the domain, the grid box and the order s, with documented defaults filling
the rest. The canonical echo of a parsed config re-parses to the same
configuration (lossless round trip).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields

import numpy as np

from .geometry import (AffinePhi, Ball, CoerciveEpigraph, ConstantPhi, Cone,
                       CornerPhi, CosinePhi, HalfSpace, LipschitzEpigraph,
                       ParabolaPhi)

__all__ = ["ExperimentConfig", "ConfigError", "parse_config", "parse_config_text",
           "config_echo", "build_domain"]


class ConfigError(ValueError):
    """Carries the full list of configuration problems."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


def _f(lo=None, hi=None, lo_open=False, hi_open=False):
    def check(v):
        if lo is not None and (v <= lo if lo_open else v < lo):
            return f"must be {'>' if lo_open else '>='} {lo}"
        if hi is not None and (v >= hi if hi_open else v > hi):
            return f"must be {'<' if hi_open else '<='} {hi}"
        return None
    return check


# schema: section -> key -> (python type, default, validator or None)
_SCHEMA = {
    "scenario": {
        "name": (str, None, None),
    },
    "domain": {
        "kind": (str, None, None),
        "dimension": (int, 1, _f(1, 3)),
        "level": (float, 0.0, None),
        "lipschitz": (float, 1.0, _f(0.0)),
        "amplitude": (float, 0.5, None),
        "frequency": (float, 1.0, None),
        "quadratic": (float, 0.5, _f(0.0, lo_open=True)),
        "radius": (float, 1.0, _f(0.0, lo_open=True)),
        "theta": (float, math.pi / 2, _f(0.0, math.pi, lo_open=True, hi_open=True)),
    },
    "grid": {
        "box_lo": (list, [-4.0], None),
        "box_hi": (list, [12.0], None),
        "h": (float, 1.0 / 64, _f(0.0, lo_open=True)),
        "window": (int, 0, _f(0)),  # 0 = choose automatically
    },
    "operator": {
        "s": (float, 0.5, _f(0.0, 1.0, lo_open=True, hi_open=True)),
    },
    "nonlinearity": {
        "kind": (str, "cubic_bistable", None),
        "mu": (float, 1.0, _f(0.0, lo_open=True)),
        "t0": (float, 0.5, _f(0.0, lo_open=True)),
        "delta0": (float, 0.5, _f(0.0, lo_open=True)),
        "t1": (float, 0.5773502691896258, _f(0.0, lo_open=True)),
        "lipschitz": (float, 2.0, _f(0.0)),
    },
    "solver": {
        "linear_tol": (float, 1e-10, _f(0.0, lo_open=True)),
        "outer_tol": (float, 1e-8, _f(0.0, lo_open=True)),
        "max_outer": (int, 500, _f(1)),
        "max_inner": (int, 100000, _f(1)),
    },
    "checks": {
        "margin_threshold": (float, 1e-6, _f(0.0)),
        "shell_inf_threshold": (float, 0.95, _f(0.0, 1.0)),
        "monotonicity_tol": (float, 1e-8, _f(0.0, lo_open=True)),
        "symmetry_tol": (float, 1e-3, _f(0.0, lo_open=True)),
        "uniqueness_tol": (float, 1e-7, _f(0.0, lo_open=True)),
        "moving_planes_tol": (float, 1e-6, _f(0.0, lo_open=True)),
        "witness_tol": (float, 1e-8, _f(0.0, lo_open=True)),
        "sderiv_spread_tol": (float, 0.03, _f(0.0, lo_open=True)),
        "face_margin_cells": (int, 2, _f(0)),
        "lateral_margin_cells": (int, 5, _f(0)),
        "eps1": (float, 0.1, _f(0.0, 1.0, lo_open=True, hi_open=True)),
        "growth_h1": (float, 1.0, _f(0.0, lo_open=True)),
        "instances": (int, 200, _f(1)),
        "lambda_count": (int, 12, _f(1)),
        "theta_list": (list, [0.55, 0.65, 0.75, 0.85], None),
        "barrier_R": (float, 0.25, _f(0.0, 1.0, lo_open=True)),
    },
    "run": {
        "seed": (int, 20240901, _f(0)),
        "threads": (int, 1, _f(1)),
        "out_dir": (str, "out", None),
    },
}

_DOMAIN_KINDS = ("halfspace", "affine", "corner", "cosine", "parabola", "ball", "cone")
_NONLINEARITY_KINDS = ("cubic_bistable", "none")


@dataclass
class ExperimentConfig:
    values: dict  # section -> key -> typed value

    def __getitem__(self, section):
        return self.values[section]

    def get(self, section, key):
        return self.values[section][key]

    @property
    def name(self) -> str:
        return self.values["scenario"]["name"]


def _parse_scalar(raw: str, typ, where: str, errors: list):
    raw = raw.strip()
    try:
        if typ is float:
            return float(raw)
        if typ is int:
            v = float(raw)
            if v != int(v):
                errors.append(f"{where}: expected an integer, got {raw!r}")
                return None
            return int(v)
        if typ is list:
            return [float(t.strip()) for t in raw.split(",") if t.strip() != ""]
        return raw
    except ValueError:
        errors.append(f"{where}: cannot parse {raw!r} as {typ.__name__}")
        return None


def parse_config_text(text: str, path: str = "<config>") -> ExperimentConfig:
    errors = []
    seen = {}
    values = {sec: {k: (list(d) if isinstance(d, list) else d)
                    for k, (t, d, v) in keys.items()}
              for sec, keys in _SCHEMA.items()}
    section = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if stripped.startswith("[") and stripped.endswith("]"):
            section = stripped[1:-1].strip()
            if section not in _SCHEMA:
                errors.append(f"line {lineno}: unknown section [{section}]")
                section = None
            continue
        if "=" not in stripped:
            errors.append(f"line {lineno}: expected key = value, got {stripped!r}")
            continue
        if section is None:
            errors.append(f"line {lineno}: key outside any known section")
            continue
        key, raw = (p.strip() for p in stripped.split("=", 1))
        if key not in _SCHEMA[section]:
            errors.append(f"line {lineno}: unknown key {key!r} in section [{section}]")
            continue
        if (section, key) in seen:
            errors.append(
                f"line {lineno}: duplicate key {key!r} in [{section}] "
                f"(first set at line {seen[(section, key)]})"
            )
            continue
        seen[(section, key)] = lineno
        typ, _, validator = _SCHEMA[section][key]
        val = _parse_scalar(raw, typ, f"line {lineno}: [{section}] {key}", errors)
        if val is None:
            continue
        if validator is not None and typ in (int, float):
            msg = validator(val)
            if msg:
                errors.append(f"line {lineno}: [{section}] {key} {msg}")
                continue
        values[section][key] = val

    # cross-field validation
    if values["scenario"]["name"] is None:
        errors.append("missing required key: [scenario] name")
    kind = values["domain"]["kind"]
    if kind is not None and kind not in _DOMAIN_KINDS:
        errors.append(f"[domain] kind must be one of {_DOMAIN_KINDS}, got {kind!r}")
    nl = values["nonlinearity"]["kind"]
    if nl not in _NONLINEARITY_KINDS:
        errors.append(f"[nonlinearity] kind must be one of {_NONLINEARITY_KINDS}, got {nl!r}")
    s = values["operator"]["s"]
    if not (0.0 < s < 1.0):
        errors.append("[operator] s must lie in (0,1)")
    dim = values["domain"]["dimension"]
    for bkey in ("box_lo", "box_hi"):
        if len(values["grid"][bkey]) != dim:
            errors.append(f"[grid] {bkey} must have {dim} components")
    if not errors:
        lo, hi = values["grid"]["box_lo"], values["grid"]["box_hi"]
        if any(a >= b for a, b in zip(lo, hi)):
            errors.append("[grid] box_lo must be strictly below box_hi componentwise")
    if errors:
        raise ConfigError([f"{path}: {e}" for e in errors])
    return ExperimentConfig(values=values)


def parse_config(path: str) -> ExperimentConfig:
    with open(path, "r") as fh:
        return parse_config_text(fh.read(), path=path)


def config_echo(cfg: ExperimentConfig) -> str:
    """Canonical text form; re-parsing it reproduces the configuration."""
    lines = []
    for sec in _SCHEMA:
        lines.append(f"[{sec}]")
        for key in _SCHEMA[sec]:
            v = cfg.values[sec][key]
            if v is None:
                continue
            if isinstance(v, list):
                lines.append(f"{key} = {', '.join(repr(float(x)) for x in v)}")
            elif isinstance(v, float):
                lines.append(f"{key} = {v!r}")
            else:
                lines.append(f"{key} = {v}")
        lines.append("")
    return "\n".join(lines)


def build_domain(cfg: ExperimentConfig):
    """Domain object from the [domain] section."""
    d = cfg.values["domain"]
    N = d["dimension"]
    kind = d["kind"]
    if kind == "halfspace":
        return HalfSpace(dimension=N, level=d["level"])
    if kind == "affine":
        return LipschitzEpigraph(dimension=N, phi_spec=AffinePhi(slope=(d["lipschitz"],) * (N - 1)))
    if kind == "corner":
        return LipschitzEpigraph(dimension=N, phi_spec=CornerPhi(K=d["lipschitz"]))
    if kind == "cosine":
        return LipschitzEpigraph(
            dimension=N, phi_spec=CosinePhi(A=d["amplitude"], omega=d["frequency"])
        )
    if kind == "parabola":
        lo, hi = cfg.values["grid"]["box_lo"], cfg.values["grid"]["box_hi"]
        rim = 0.95 * min(abs(hi[0]), abs(lo[0])) if N > 1 else 1.0
        return CoerciveEpigraph(
            dimension=N, phi_spec=ParabolaPhi(q=d["quadratic"]),
            check_radius=rim, check_margin=0.5,
        )
    if kind == "ball":
        return Ball(dimension=N, center=tuple(0.0 for _ in range(N)), radius=d["radius"])
    if kind == "cone":
        axis = tuple([0.0] * (N - 1) + [1.0])
        return Cone(dimension=N, axis=axis, theta=d["theta"])
    raise ConfigError([f"unsupported domain kind {kind!r}"])
