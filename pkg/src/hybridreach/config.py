"""Run configuration: an INI-style text file with ``[model]``, ``[scheme]``,
``[table]`` and ``[run]`` sections.

Minimal example::

    [model]
    a_x = 0.1
    a_y = 0.15
    u_max = 0.07
    delta = 2
    x0 = 0.3
    y0 = 0.8

    [scheme]
    dx = 0.025
"""

from __future__ import annotations

import configparser
import hashlib
import json
import logging
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

from .errors import ConfigFileMissing, ConfigSchemaError, ConfigValueError, ContractError
from .model import BallSet, BoxSet, VehicleModel
from .solver import SchemeConfig

logger = logging.getLogger(__name__)

SWITCH_POLICIES = ("toggle", "full", "none")


@dataclass
class VehicleParams:
    a_x: float
    a_y: float
    u_max: float
    delta: float
    x0: float
    y0: float
    radius: float | None = None  # None: two cells
    k_lower: tuple = (0.0, 0.0)
    k_upper: tuple = (1.0, 1.0)
    switch_policy: str = "toggle"


@dataclass
class TableParams:
    instances: tuple = ((0.5, 0.5), (0.3, 0.8))
    dx_list: tuple = (0.05, 0.04, 0.03, 0.02)


@dataclass
class RunConfig:
    model: VehicleParams
    scheme: SchemeConfig = field(default_factory=SchemeConfig)
    table: TableParams = field(default_factory=TableParams)
    seed: int = 0

    def initial_radius(self, dx: float | None = None) -> float:
        if self.model.radius is not None:
            return self.model.radius
        return 2.0 * (self.scheme.dx if dx is None else dx)

    def build_model(self, dx: float | None = None) -> VehicleModel:
        p = self.model
        L = self.scheme.clip_bound
        return VehicleModel(p.a_x, p.a_y, p.u_max, p.delta,
                            admissible_set=BoxSet(p.k_lower, p.k_upper, clip_bound=L),
                            initial_set=BallSet([p.x0, p.y0], self.initial_radius(dx), clip_bound=L),
                            switch_policy=p.switch_policy)

    def to_dict(self) -> dict:
        m = {f.name: getattr(self.model, f.name) for f in fields(VehicleParams)}
        m["k_lower"], m["k_upper"] = list(m["k_lower"]), list(m["k_upper"])
        return {
            "model": m,
            "scheme": self.scheme.to_dict(),
            "table": {"instances": [list(i) for i in self.table.instances], "dx_list": list(self.table.dx_list)},
            "run": {"seed": self.seed},
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        m = dict(d["model"])
        m["k_lower"], m["k_upper"] = tuple(m["k_lower"]), tuple(m["k_upper"])
        t = d.get("table", {})
        return cls(
            model=VehicleParams(**m),
            scheme=SchemeConfig(**d["scheme"]),
            table=TableParams(tuple(tuple(i) for i in t.get("instances", TableParams.instances)),
                              tuple(t.get("dx_list", TableParams.dx_list))),
            seed=int(d.get("run", {}).get("seed", 0)),
        )

    def sha256(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


_MODEL_KEYS = {
    "a_x": float, "a_y": float, "u_max": float, "delta": float, "x0": float, "y0": float,
    "radius": float, "k_lower": "vec", "k_upper": "vec", "switch_policy": str,
}
_SCHEME_KEYS = {
    "dx": float, "dp": float, "horizon": float, "cfl_factor": float, "clip_bound": float,
    "margin": float, "n_u": int, "tol": float, "output_cadence": int, "snapshot_times": "vec",
    "keep_fields_at": "vec", "early_stop": bool,
}
_TABLE_KEYS = {"instances": "pairs", "dx_list": "vec"}
_RUN_KEYS = {"seed": int}
_SECTIONS = {"model": _MODEL_KEYS, "scheme": _SCHEME_KEYS, "table": _TABLE_KEYS, "run": _RUN_KEYS}
_REQUIRED_MODEL = ("a_x", "a_y", "u_max", "delta", "x0", "y0")


def _convert(section, key, raw, kind):
    try:
        if kind == "vec":
            return tuple(float(v) for v in raw.replace(";", ",").split(",") if v.strip())
        if kind == "pairs":
            pairs = []
            for chunk in raw.split(";"):
                if chunk.strip():
                    a, b = chunk.replace(",", " ").split()
                    pairs.append((float(a), float(b)))
            return tuple(pairs)
        if kind is bool:
            low = raw.strip().lower()
            if low not in ("true", "false", "yes", "no", "1", "0", "on", "off"):
                raise ValueError(raw)
            return low in ("true", "yes", "1", "on")
        if kind is int:
            return int(raw)
        if kind is float:
            return float(raw)
        return raw.strip()
    except ValueError as exc:
        raise ConfigSchemaError(f"[{section}] {key}: cannot parse {raw!r}") from exc


def parse_text(text: str) -> RunConfig:
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"), interpolation=None)
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigSchemaError(f"malformed config: {exc}") from exc
    values = {}
    for section in cp.sections():
        if section not in _SECTIONS:
            raise ConfigSchemaError(f"unknown section [{section}]")
        schema = _SECTIONS[section]
        for key, raw in cp.items(section):
            if key not in schema:
                raise ConfigSchemaError(f"unknown key {key!r} in [{section}]")
            values.setdefault(section, {})[key] = _convert(section, key, raw, schema[key])
    model = values.get("model", {})
    missing = [k for k in _REQUIRED_MODEL if k not in model]
    if missing:
        raise ConfigSchemaError(f"missing [model] keys: {', '.join(missing)}")
    return _validate(model, values.get("scheme", {}), values.get("table", {}), values.get("run", {}))


def _validate(model, scheme, table, run) -> RunConfig:
    for key in ("a_x", "a_y"):
        if model[key] <= 0:
            raise ConfigValueError(f"{key} must be positive, got {model[key]}")
    if model["u_max"] < 0:
        raise ConfigValueError("u_max must be nonnegative")
    if model["delta"] <= 0:
        raise ConfigValueError(f"decision lag delta must be positive, got {model['delta']}")
    if model.get("radius", 1.0) <= 0:
        raise ConfigValueError("radius must be positive")
    if model.get("switch_policy", "toggle") not in SWITCH_POLICIES:
        raise ConfigValueError(f"switch_policy must be one of {SWITCH_POLICIES}")
    for key in ("k_lower", "k_upper"):
        if key in model and len(model[key]) != 2:
            raise ConfigValueError(f"{key} needs two components")
    try:
        sc = SchemeConfig(**scheme)
    except ContractError as exc:
        raise ConfigValueError(str(exc)) from exc
    if any(d <= 0 for d in table.get("dx_list", (1,))):
        raise ConfigValueError("dx_list entries must be positive")
    if sc.dp > model["delta"]:
        logger.warning("dp=%g exceeds delta=%g: lag rounds up to one lock cell", sc.dp, model["delta"])
    params = VehicleParams(**model)
    tp = TableParams(**table)
    return RunConfig(params, sc, tp, run.get("seed", 0))


def parse_config(path) -> RunConfig:
    path = Path(path)
    if not path.is_file():
        raise ConfigFileMissing(f"config file not found: {path}")
    return parse_text(path.read_text())


def to_text(cfg: RunConfig) -> str:
    """Canonical config text; parses back to an equal :class:`RunConfig`."""
    d = cfg.to_dict()
    out = []

    def fmt(v):
        if isinstance(v, bool):
            return "true" if v else "false"
        if isinstance(v, (list, tuple)):
            if v and isinstance(v[0], (list, tuple)):
                return "; ".join(" ".join(repr(float(a)) for a in pair) for pair in v)
            return ", ".join(repr(float(a)) for a in v)
        if isinstance(v, float):
            return repr(v)
        return str(v)

    for section in ("model", "scheme", "table", "run"):
        out.append(f"[{section}]")
        for key, val in d[section].items():
            if val is None or (isinstance(val, (list, tuple)) and not val):
                continue
            out.append(f"{key} = {fmt(val)}")
        out.append("")
    return "\n".join(out)


def with_overrides(cfg: RunConfig, **scheme_overrides) -> RunConfig:
    kept = {k: v for k, v in scheme_overrides.items() if v is not None}
    return replace(cfg, scheme=replace(cfg.scheme, **kept)) if kept else cfg
