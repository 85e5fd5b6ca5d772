"""JSON experiment configuration.

Complex numbers are ``{"re": .., "im": ..}`` objects (``im`` defaults to 0);
term lists carry their exponents next to the value::

    {
      "name": "z3zbar",
      "generator": {
        "g": {"degree": 4, "terms": [{"k": 1, "re": 1}]},
        "F": [{"j": 3, "k": 0, "re": 1}],
        "h": {"class": "o(g)", "terms": [{"p": 2, "q": 1, "re": 0.5}]},
        "direct": [{"p": 0, "q": 2, "re": 1}, {"p": 3, "q": 0, "re": 1}]
      },
      "certificate": [{"j": 3, "k": 0, "im": -1}, {"j": 0, "k": 3, "im": 1}],
      "radius": 0.1,
      "degrees": [2, 4, 6, 8],
      "targets": [{"name": "conj(z)^2", "terms": [{"p": 0, "q": 2, "re": 1}]}]
    }

Every field except ``generator`` and ``radius`` has a default.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

import numpy as np

from .geometry import SMALLNESS_CLASSES, GeneratorSpec, GeometryError
from .symbolic import BiPoly, HomogeneousSymbol, MixedPoly


class ConfigError(ValueError):
    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


@dataclass
class Target:
    name: str
    func: Callable
    description: dict


@dataclass
class Config:
    name: str
    spec: GeneratorSpec
    certificate: BiPoly | None = None
    second_certificate: BiPoly | None = None
    n_r: int = 12
    n_theta: int = 48
    margin_samples: int = 4096
    verify_angles: int = 256
    verify_radii: list[float] = field(default_factory=lambda: [1e-1, 1e-2, 1e-3])
    residual_radii: list[float] | None = None
    kallin_radius: float | None = None
    degrees: list[int] = field(default_factory=lambda: [2, 4, 6, 8])
    targets: list[Target] = field(default_factory=list)
    zero_tol: float = 1e-9
    sign_tol: float = 0.0
    newton_tol: float = 1e-14
    separation_tol: float = 1e-8
    cap: float = 1.0
    ridge: float = 1e-12
    lawson_iters: int = 20
    perturbation_class: str = "o(g)"
    output: str = "out"


def _get(obj: dict, key: str, path: str, kind, default=...):
    if key not in obj:
        if default is ...:
            raise ConfigError(f"{path}.{key}", "missing required field")
        return default
    value = obj[key]
    if kind is float and isinstance(value, int) and not isinstance(value, bool):
        value = float(value)
    wrong_type = not isinstance(value, kind) or (isinstance(value, bool) and kind is not bool)
    if wrong_type:
        raise ConfigError(f"{path}.{key}", f"expected {getattr(kind, '__name__', kind)}, got {value!r}")
    if kind is float and not math.isfinite(value):
        raise ConfigError(f"{path}.{key}", "must be finite")
    return value


def _complex(obj: dict, path: str) -> complex:
    re = _get(obj, "re", path, float, 0.0)
    im = _get(obj, "im", path, float, 0.0)
    return complex(re, im)


def _term_list(value, path: str) -> list[dict]:
    if not isinstance(value, list):
        raise ConfigError(path, f"expected a list of terms, got {type(value).__name__}")
    for i, item in enumerate(value):
        if not isinstance(item, dict):
            raise ConfigError(f"{path}[{i}]", "term must be an object")
    return value


def _exponent(obj: dict, key: str, path: str, allow_negative: bool = False) -> int:
    value = _get(obj, key, path, int)
    if value < 0 and not allow_negative:
        raise ConfigError(f"{path}.{key}", f"exponent must be >= 0, got {value}")
    return value


def parse_bipoly(value, path: str) -> BiPoly:
    terms: dict = {}
    for i, item in enumerate(_term_list(value, path)):
        p = f"{path}[{i}]"
        key = (_exponent(item, "j", p), _exponent(item, "k", p))
        terms[key] = terms.get(key, 0j) + _complex(item, p)
    return BiPoly(terms)


def parse_mixed(value, path: str, parity=None) -> MixedPoly:
    terms: dict = {}
    for i, item in enumerate(_term_list(value, path)):
        p = f"{path}[{i}]"
        key = (_exponent(item, "p", p), _exponent(item, "q", p))
        terms[key] = terms.get(key, 0j) + _complex(item, p)
    try:
        return MixedPoly(terms, parity)
    except ValueError as exc:
        raise ConfigError(path, str(exc)) from None


def parse_symbol(value, path: str) -> HomogeneousSymbol:
    if not isinstance(value, dict):
        raise ConfigError(path, "symbol must be an object with 'degree' and 'terms'")
    degree = _get(value, "degree", path, int)
    terms: dict = {}
    for i, item in enumerate(_term_list(_get(value, "terms", path, list), f"{path}.terms")):
        p = f"{path}.terms[{i}]"
        k = _exponent(item, "k", p, allow_negative=True)
        terms[k] = terms.get(k, 0j) + _complex(item, p)
    try:
        return HomogeneousSymbol(degree, terms)
    except ValueError as exc:
        raise ConfigError(f"{path}.degree", str(exc)) from None


def parse_target(value, path: str) -> Target:
    if not isinstance(value, dict):
        raise ConfigError(path, "target must be an object")
    name = _get(value, "name", path, str)
    if "abs_power" in value:
        power = _get(value, "abs_power", path, float)
        return Target(name, lambda z, s=power: np.abs(z) ** s + 0j, {"name": name, "abs_power": power})
    if "terms" in value:
        poly = parse_mixed(value["terms"], f"{path}.terms")
        return Target(name, poly, {"name": name, "terms": value["terms"]})
    raise ConfigError(path, "target needs 'terms' or 'abs_power'")


DEFAULT_TARGETS = [
    {"name": "conj(z)^2", "terms": [{"p": 0, "q": 2, "re": 1.0}]},
    {"name": "conj(z)", "terms": [{"p": 0, "q": 1, "re": 1.0}]},
]


def _float_list(obj, key, path, default):
    value = _get(obj, key, path, list, default)
    if value is None:
        return None
    out = []
    for i, v in enumerate(value):
        if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v) or v <= 0:
            raise ConfigError(f"{path}.{key}[{i}]", f"expected a positive number, got {v!r}")
        out.append(float(v))
    return out


def parse_config(raw: Any) -> Config:
    if not isinstance(raw, dict):
        raise ConfigError("$", "configuration must be a JSON object")
    gen = _get(raw, "generator", "$", dict)
    gp = "$.generator"
    F = parse_bipoly(gen.get("F", []), f"{gp}.F")
    g = parse_symbol(gen["g"], f"{gp}.g") if gen.get("g") is not None else None
    h = None
    h_class = "o(g)"
    if gen.get("h") is not None:
        hv = _get(gen, "h", gp, dict)
        h_class = _get(hv, "class", f"{gp}.h", str, "o(g)")
        if h_class not in SMALLNESS_CLASSES:
            raise ConfigError(f"{gp}.h.class", f"must be one of {SMALLNESS_CLASSES}")
        if "symbol" in hv:
            h = parse_symbol(hv["symbol"], f"{gp}.h.symbol")
        else:
            h = parse_mixed(_get(hv, "terms", f"{gp}.h", list), f"{gp}.h.terms")
    direct = parse_mixed(gen["direct"], f"{gp}.direct") if gen.get("direct") is not None else None
    radius = _get(raw, "radius", "$", float)
    try:
        spec = GeneratorSpec(radius=radius, F=F, g=g, h=h, h_class=h_class, direct=direct)
    except GeometryError as exc:
        raise ConfigError(gp, str(exc)) from None

    cfg = Config(name=_get(raw, "name", "$", str, "unnamed"), spec=spec)
    if raw.get("certificate") is not None:
        cfg.certificate = parse_bipoly(raw["certificate"], "$.certificate")
    if raw.get("second_certificate") is not None:
        cfg.second_certificate = parse_bipoly(raw["second_certificate"], "$.second_certificate")

    samp = _get(raw, "sampling", "$", dict, {})
    for key in ("n_r", "n_theta", "margin_samples", "verify_angles"):
        value = _get(samp, key, "$.sampling", int, getattr(cfg, key))
        if value < 1:
            raise ConfigError(f"$.sampling.{key}", "must be >= 1")
        setattr(cfg, key, value)
    if cfg.margin_samples < 64:
        raise ConfigError("$.sampling.margin_samples", "must be >= 64")

    cfg.verify_radii = _float_list(raw, "verify_radii", "$", cfg.verify_radii)
    cfg.residual_radii = _float_list(raw, "residual_radii", "$", None)
    if "kallin_radius" in raw:
        cfg.kallin_radius = _get(raw, "kallin_radius", "$", float)

    degrees = _get(raw, "degrees", "$", list, cfg.degrees)
    for i, d in enumerate(degrees):
        if isinstance(d, bool) or not isinstance(d, int) or d < 0:
            raise ConfigError(f"$.degrees[{i}]", f"expected a non-negative integer, got {d!r}")
    if any(b <= a for a, b in zip(degrees, degrees[1:])):
        raise ConfigError("$.degrees", "must be strictly increasing")
    cfg.degrees = list(degrees)

    targets = _get(raw, "targets", "$", list, DEFAULT_TARGETS)
    cfg.targets = [parse_target(t, f"$.targets[{i}]") for i, t in enumerate(targets)]

    tol = _get(raw, "tolerances", "$", dict, {})
    for key in ("zero_tol", "sign_tol", "newton_tol", "separation_tol"):
        value = _get(tol, key, "$.tolerances", float, getattr(cfg, key))
        if value < 0:
            raise ConfigError(f"$.tolerances.{key}", "must be >= 0")
        setattr(cfg, key, value)
    cfg.cap = _get(raw, "cap", "$", float, cfg.cap)
    if cfg.cap <= 0:
        raise ConfigError("$.cap", "must be positive")
    cfg.ridge = _get(raw, "ridge", "$", float, cfg.ridge)
    cfg.lawson_iters = _get(raw, "lawson_iters", "$", int, cfg.lawson_iters)
    cfg.perturbation_class = _get(raw, "perturbation_class", "$", str, spec.h_class)
    if cfg.perturbation_class not in SMALLNESS_CLASSES:
        raise ConfigError("$.perturbation_class", f"must be one of {SMALLNESS_CLASSES}")
    cfg.output = _get(raw, "output", "$", str, cfg.output)
    return cfg


def load_config(path: str | Path) -> Config:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(str(path), f"cannot read configuration: {exc.strerror}") from None
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}", exc.msg) from None
    return parse_config(raw)


def bipoly_to_json(p: BiPoly) -> list[dict]:
    return [{"j": j, "k": k, "re": c.real, "im": c.imag} for (j, k), c in p]
