"""Run configuration: strict JSON parsing, presets, sweep specifications.

Angles are degrees in files and radians internally.  Parsing is strict:
unknown keys raise ParseError so typos cannot silently fall back to
defaults.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from importlib import resources
from pathlib import Path
from typing import Any, Optional

from .atmosphere import Environment
from .cycle import OperationSettings
from .errors import ParseError, ValidationError
from .steady_state import AeroSet, KiteParams, TetherParams

__all__ = [
    "RunConfig",
    "SweepSpec",
    "load_config",
    "save_config",
    "config_to_dict",
    "load_sweep_spec",
    "set_by_path",
    "preset_path",
    "PRESET_NAMES",
]

PRESET_NAMES = ("strong_wind", "moderate_wind")


@dataclass(frozen=True)
class RunConfig:
    """Validated bundle of everything a simulation run needs."""

    environment: Environment
    kite: KiteParams
    tether: TetherParams
    operation: OperationSettings
    out_dir: Optional[str] = None


def _take(mapping: dict, context: str, required: tuple[str, ...],
          optional: tuple[str, ...] = ()) -> dict:
    """Extract exactly the allowed keys from a parsed JSON object."""
    if not isinstance(mapping, dict):
        raise ParseError(f"{context}: expected an object, got {type(mapping).__name__}")
    unknown = set(mapping) - set(required) - set(optional)
    if unknown:
        raise ParseError(f"{context}: unknown key(s) {sorted(unknown)}")
    missing = set(required) - set(mapping)
    if missing:
        raise ParseError(f"{context}: missing key(s) {sorted(missing)}")
    return mapping


def _config_from_dict(raw: dict) -> RunConfig:
    top = _take(raw, "config", ("environment", "kite", "tether", "operation"),
                ("gravity", "force_at", "out_dir"))

    e = _take(top["environment"], "environment", ("v_w_ref", "z_ref", "z0"),
              ("rho0", "H_rho"))
    environment = Environment(**e)

    k = _take(top["kite"], "kite", ("S", "m", "aero_traction", "aero_retraction"))
    aero_o = _take(k["aero_traction"], "kite.aero_traction", ("C_L", "LD_k"))
    aero_i = _take(k["aero_retraction"], "kite.aero_retraction", ("C_L", "LD_k"))
    kite = KiteParams(
        S=k["S"], m=k["m"],
        aero_traction=AeroSet(**aero_o),
        aero_retraction=AeroSet(**aero_i),
    )

    t = _take(top["tether"], "tether", ("d_t", "rho_t"), ("C_D_c",))
    tether = TetherParams(**t)

    o = _take(top["operation"], "operation",
              ("beta_deg", "phi_deg", "chi_deg", "r_min", "r_max", "F_out", "F_in"),
              ("dT",))
    operation = OperationSettings(
        beta_o=math.radians(o["beta_deg"]),
        phi_o=math.radians(o["phi_deg"]),
        chi_o=math.radians(o["chi_deg"]),
        r_min=o["r_min"],
        r_max=o["r_max"],
        F_out=o["F_out"],
        F_in=o["F_in"],
        dT=o.get("dT", 0.01),
        gravity=top.get("gravity", True),
        force_at=top.get("force_at", "kite"),
    )
    return RunConfig(
        environment=environment,
        kite=kite,
        tether=tether,
        operation=operation,
        out_dir=top.get("out_dir"),
    )


def load_config(path: str | Path) -> RunConfig:
    """Parse and validate a run configuration file.

    Raises:
        ParseError: on malformed JSON or unknown keys.
        ValidationError: on invariant violations, naming the invariant.
    """
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: line {exc.lineno}: {exc.msg}") from exc
    except OSError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    try:
        return _config_from_dict(raw)
    except TypeError as exc:
        raise ParseError(f"{path}: {exc}") from exc


def config_to_dict(cfg: RunConfig) -> dict:
    """Inverse of :func:`load_config`; angles back to degrees."""
    out: dict[str, Any] = {
        "environment": {
            "v_w_ref": cfg.environment.v_w_ref,
            "z_ref": cfg.environment.z_ref,
            "z0": cfg.environment.z0,
            "rho0": cfg.environment.rho0,
            "H_rho": cfg.environment.H_rho,
        },
        "kite": {
            "S": cfg.kite.S,
            "m": cfg.kite.m,
            "aero_traction": {
                "C_L": cfg.kite.aero_traction.C_L,
                "LD_k": cfg.kite.aero_traction.LD_k,
            },
            "aero_retraction": {
                "C_L": cfg.kite.aero_retraction.C_L,
                "LD_k": cfg.kite.aero_retraction.LD_k,
            },
        },
        "tether": {
            "d_t": cfg.tether.d_t,
            "rho_t": cfg.tether.rho_t,
            "C_D_c": cfg.tether.C_D_c,
        },
        "operation": {
            "beta_deg": math.degrees(cfg.operation.beta_o),
            "phi_deg": math.degrees(cfg.operation.phi_o),
            "chi_deg": math.degrees(cfg.operation.chi_o),
            "r_min": cfg.operation.r_min,
            "r_max": cfg.operation.r_max,
            "F_out": cfg.operation.F_out,
            "F_in": cfg.operation.F_in,
            "dT": cfg.operation.dT,
        },
        "gravity": cfg.operation.gravity,
        "force_at": cfg.operation.force_at,
    }
    if cfg.out_dir is not None:
        out["out_dir"] = cfg.out_dir
    return out


def save_config(cfg: RunConfig, path: str | Path) -> None:
    Path(path).write_text(json.dumps(config_to_dict(cfg), indent=2) + "\n", encoding="utf-8")


def preset_path(name: str) -> Path:
    """Filesystem path of a bundled preset configuration."""
    if name not in PRESET_NAMES:
        raise ValidationError(f"unknown preset {name!r}; available: {PRESET_NAMES}")
    return Path(str(resources.files("kitecycle") / "presets" / f"{name}.json"))


@dataclass(frozen=True)
class SweepSpec:
    """A one-parameter sweep: which scalar to vary, over which values,
    judged by which cycle objective."""

    parameter: str
    values: tuple[float, ...]
    objective: str = "P_m"

    def __post_init__(self):
        if not self.values:
            raise ValidationError("sweep requires at least one value")
        if self.objective not in ("P_m", "zeta_m"):
            raise ValidationError(
                f"objective must be 'P_m' or 'zeta_m', got {self.objective!r}"
            )


def load_sweep_spec(path: str | Path) -> SweepSpec:
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: line {exc.lineno}: {exc.msg}") from exc
    except OSError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    spec = _take(raw, "sweep", ("parameter",), ("values", "range", "objective"))
    if ("values" in spec) == ("range" in spec):
        raise ParseError(f"{path}: exactly one of 'values' or 'range' is required")
    if "values" in spec:
        values = tuple(float(v) for v in spec["values"])
    else:
        rng = _take(spec["range"], "sweep.range", ("start", "stop", "num"))
        num = int(rng["num"])
        if num < 2:
            raise ValidationError("sweep range needs num >= 2")
        start, stop = float(rng["start"]), float(rng["stop"])
        step = (stop - start) / (num - 1)
        values = tuple(start + i * step for i in range(num))
    return SweepSpec(parameter=spec["parameter"],
                     values=values,
                     objective=spec.get("objective", "P_m"))


# Sweepable scalar fields, by dataclass attribute path.
_SWEEPABLE = {
    "environment": Environment,
    "kite": KiteParams,
    "tether": TetherParams,
    "operation": OperationSettings,
}


def set_by_path(cfg: RunConfig, path: str, value: float) -> RunConfig:
    """Return a copy of ``cfg`` with one scalar replaced.

    ``path`` is dotted, e.g. ``operation.F_out`` or
    ``kite.aero_traction.C_L``.
    """
    parts = path.split(".")
    if len(parts) < 2 or parts[0] not in _SWEEPABLE:
        raise ValidationError(f"cannot resolve sweep parameter path {path!r}")

    def rebuild(obj, names: list[str]):
        if not hasattr(obj, names[0]):
            raise ValidationError(f"cannot resolve sweep parameter path {path!r}")
        if len(names) == 1:
            current = getattr(obj, names[0])
            if not isinstance(current, (int, float)) or isinstance(current, bool):
                raise ValidationError(f"sweep parameter {path!r} is not a scalar")
            return replace(obj, **{names[0]: value})
        return replace(obj, **{names[0]: rebuild(getattr(obj, names[0]), names[1:])})

    return replace(cfg, **{parts[0]: rebuild(getattr(cfg, parts[0]), parts[1:])})
