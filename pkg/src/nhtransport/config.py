"""JSON scenario configuration: parsing, validation and defaults."""

from __future__ import annotations

import json
import math
import re
from pathlib import Path

from .errors import ConfigurationError
from .model import AuxiliaryParams, LatticeParams

LATTICE_KEYS = {"kappa", "rho", "gamma", "phi", "phi_prime"}
AUX_KEYS = {"epsilon", "sigma", "u_site"}
RUN_KEYS = {"disorder", "size", "dt", "t_max", "sample_dt", "seed"}
COMMON_KEYS = LATTICE_KEYS | AUX_KEYS | RUN_KEYS
DISORDER_KEYS = {"kind", "delta", "v0", "n1", "n2", "seed"}

SUBCOMMAND_KEYS = {
    "band": {"phis", "points"},
    "spread": {"init", "pgm", "representation", "margin"},
    "ensemble": {"deltas", "settings", "realizations"},
    "wavepacket": {"mode", "w0", "q0s", "v0", "n1", "n2", "launch_gap", "pulse_threshold", "pgm"},
    "asymptotics": {"time", "panels", "margin"},
    "check": set(),
}

_PI_EXPR = re.compile(r"^\s*([+-]?)\s*(\d*\.?\d*)\s*\*?\s*pi\s*(?:/\s*(\d+\.?\d*))?\s*$")


def parse_angle(value) -> float:
    """Accept plain numbers or strings such as ``"pi/4"``, ``"-pi/2"``, ``"0.5*pi"``."""
    if isinstance(value, bool):
        raise ConfigurationError(f"invalid angle {value!r}")
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, str):
        m = _PI_EXPR.match(value)
        if m:
            sign, coef, denom = m.groups()
            x = (float(coef) if coef not in ("", ".") else 1.0) * math.pi
            if denom:
                x /= float(denom)
            return -x if sign == "-" else x
        try:
            return float(value)
        except ValueError:
            pass
    raise ConfigurationError(f"invalid angle {value!r}")


def number(cfg, key, default=None, *, minimum=None, integer=False):
    if key not in cfg or cfg[key] is None:
        return default
    value = cfg[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigurationError(f"{key} must be a number")
    if integer:
        if int(value) != value:
            raise ConfigurationError(f"{key} must be an integer")
        value = int(value)
    if minimum is not None and value < minimum:
        raise ConfigurationError(f"{key} must be >= {minimum}")
    return value


def load_config(path: str | Path | None) -> dict:
    if path is None:
        return {}
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigurationError("config must be a JSON object")
    return cfg


def validate_keys(cfg: dict, subcommand: str) -> None:
    allowed = COMMON_KEYS | SUBCOMMAND_KEYS[subcommand]
    unknown = sorted(set(cfg) - allowed)
    if unknown:
        raise ConfigurationError(f"unknown config keys for {subcommand!r}: {unknown}")
    dis = cfg.get("disorder")
    if dis is not None:
        if not isinstance(dis, dict):
            raise ConfigurationError("disorder must be an object")
        unknown = sorted(set(dis) - DISORDER_KEYS)
        if unknown:
            raise ConfigurationError(f"unknown disorder keys: {unknown}")


def lattice_params(cfg: dict, defaults: dict | None = None) -> LatticeParams:
    base = {"kappa": 0.3, "rho": 1.0, "gamma": 0.6, "phi": math.pi / 4}
    base.update(defaults or {})
    merged = {**base, **{k: cfg[k] for k in LATTICE_KEYS if k in cfg}}
    kwargs = {}
    for key in ("kappa", "rho", "gamma"):
        kwargs[key] = number(merged, key)
    kwargs["phi"] = parse_angle(merged["phi"])
    if merged.get("phi_prime") is not None:
        kwargs["phi_prime"] = parse_angle(merged["phi_prime"])
    return LatticeParams(**kwargs)


def auxiliary_params(cfg: dict) -> AuxiliaryParams | None:
    present = AUX_KEYS & set(cfg)
    if not present:
        return None
    if present != AUX_KEYS:
        raise ConfigurationError("epsilon, sigma and u_site must be given together")
    u = cfg["u_site"]
    if not (isinstance(u, list) and len(u) == 2):
        raise ConfigurationError("u_site must be [re, im]")
    return AuxiliaryParams(number(cfg, "epsilon"), number(cfg, "sigma", minimum=0), complex(u[0], u[1]))


def disorder_block(cfg: dict, seed_override: int | None = None) -> dict:
    """Normalised disorder description with every default filled in."""
    dis = dict(cfg.get("disorder") or {"kind": "clean"})
    kind = dis.get("kind", "clean")
    if kind not in ("clean", "uniform", "defect_pair"):
        raise ConfigurationError(f"unknown disorder kind {kind!r}")
    out = {"kind": kind}
    if kind == "uniform":
        out["delta"] = float(number(dis, "delta", 1.0, minimum=0))
        out["seed"] = int(number(dis, "seed", 0, minimum=0, integer=True))
    elif kind == "defect_pair":
        out["v0"] = float(number(dis, "v0", 1.0))
        out["n1"] = number(dis, "n1", -20, integer=True)
        out["n2"] = number(dis, "n2", 0, integer=True)
    if seed_override is not None and kind == "uniform":
        out["seed"] = seed_override
    return out


def angle_list(cfg: dict, key: str, default: list) -> list[float]:
    values = cfg.get(key, default)
    if not isinstance(values, list):
        raise ConfigurationError(f"{key} must be a list")
    if not values:
        raise ConfigurationError(f"{key} must not be empty")
    return [parse_angle(v) for v in values]


