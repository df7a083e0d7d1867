"""Experiment configuration files (JSON, or TOML as a convenience).

Complex scalars may be written as numbers, as strings understood by
:class:`complex` (``"0.3j"``, ``"0.1-0.2j"``) or as ``{"re": x, "im": y}``.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from .errors import BallopError
from .hardy import SpaceSpec
from .sweep import DIAGNOSTIC_KINDS, RESIDUAL_KINDS, load_calibration

DEFAULT_EXPLORATORY_NORM = 0.6


class ConfigError(BallopError, ValueError):
    pass


def parse_complex(x) -> complex:
    if isinstance(x, dict):
        return complex(float(x.get("re", 0.0)), float(x.get("im", 0.0)))
    if isinstance(x, str):
        try:
            return complex(x.replace(" ", "").replace("i", "j"))
        except ValueError as exc:
            raise ConfigError(f"cannot read complex number {x!r}") from exc
    if isinstance(x, (int, float)) and not isinstance(x, bool):
        return complex(x)
    raise ConfigError(f"cannot read complex number {x!r}")


def parse_array(x, ndim: int, what: str) -> np.ndarray:
    if isinstance(x, dict) and "re" in x:
        arr = np.asarray(x["re"], dtype=float) + 1j * np.asarray(x.get("im", 0.0), dtype=float)
    else:
        try:
            arr = np.array(_map_nested(x), dtype=complex)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"cannot read {what}: {exc}") from exc
    arr = np.atleast_1d(arr) if ndim == 1 else np.atleast_2d(arr)
    if arr.ndim != ndim:
        raise ConfigError(f"{what} must be {ndim}-dimensional")
    return arr


def _map_nested(x):
    if isinstance(x, list):
        return [_map_nested(v) for v in x]
    return parse_complex(x)


@dataclass
class SpaceCell:
    n: int
    s: float | None = None
    beta: tuple[float, ...] | None = None
    degrees: tuple[int, ...] = ()

    @property
    def weight(self) -> str:
        return f"{self.s:g}" if self.s is not None else "beta"

    def at(self, D: int) -> SpaceSpec:
        beta = None if self.beta is None else self.beta[:D + 1]
        return SpaceSpec(self.n, D, s=self.s, beta=beta)


@dataclass
class ExperimentConfig:
    raw: dict
    spaces: list[SpaceCell]
    symbols: list[dict]
    takagi: list[dict]
    a_norms: list[float]
    directions: dict[int, np.ndarray]
    thresholds: dict[str, float]
    calibration: dict | None
    exploratory_norm: float
    normal_tol: float
    nonnormal_floor: float
    residuals: list[str]
    seed: int
    digest: str = field(default="")


def _load_text(path: Path) -> dict:
    text = path.read_text()
    if path.suffix.lower() == ".toml":
        try:
            import tomllib
        except ImportError:  # Python < 3.11
            import tomli as tomllib
        return tomllib.loads(text)
    return json.loads(text)


def load_config(path, seed: int | None = None) -> ExperimentConfig:
    path = Path(path)
    try:
        raw = _load_text(path)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except (json.JSONDecodeError, ValueError) as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from exc
    return build_config(raw, base=path.parent, seed=seed)


def build_config(raw: dict, base: Path | None = None, seed: int | None = None) -> ExperimentConfig:
    if not isinstance(raw, dict):
        raise ConfigError("config must be a mapping")
    default_degrees = raw.get("degrees", [])
    spaces = []
    for i, sp in enumerate(raw.get("spaces", [])):
        try:
            degrees = sp.get("D", default_degrees)
            degrees = tuple(int(d) for d in (degrees if isinstance(degrees, list) else [degrees]))
            cell = SpaceCell(int(sp["n"]), s=sp.get("s"),
                             beta=None if sp.get("beta") is None else tuple(sp["beta"]),
                             degrees=degrees)
            for D in degrees:
                cell.at(D)  # validates
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"space cell {i}: {exc}") from exc
        spaces.append(cell)

    symbols = []
    for i, sym in enumerate(raw.get("symbols", [])):
        kind = sym.get("kind")
        try:
            if kind == "mobius":
                parsed = {"kind": kind, "a": parse_array(sym["a"], 1, "a")}
            elif kind == "linear":
                parsed = {"kind": kind, "V": parse_array(sym["V"], 2, "V")}
            elif kind == "lfm":
                parsed = {"kind": kind, "A": parse_array(sym["A"], 2, "A"),
                          "B": parse_array(sym["B"], 1, "B"), "C": parse_array(sym["C"], 1, "C"),
                          "d": parse_complex(sym.get("d", 1.0))}
            else:
                raise ConfigError(f"unknown symbol kind {kind!r}")
        except KeyError as exc:
            raise ConfigError(f"symbol cell {i}: missing field {exc}") from exc
        symbols.append(parsed)

    takagi = []
    for i, cell in enumerate(raw.get("takagi", [])):
        if cell.get("construct"):
            takagi.append({"construct": True, "n": int(cell.get("n", 2)),
                           "count": int(cell.get("count", 1))})
        elif "V" in cell:
            parsed = {"V": parse_array(cell["V"], 2, "V")}
            if "K" in cell:
                parsed["K"] = parse_array(cell["K"], 2, "K")
            elif not cell.get("search"):
                raise ConfigError(f"takagi cell {i}: give K or set search = true")
            takagi.append(parsed)
        else:
            raise ConfigError(f"takagi cell {i}: needs V (with K or search) or construct")

    directions = {}
    for key, vec in raw.get("directions", {}).items():
        u = parse_array(vec, 1, "direction")
        norm = np.linalg.norm(u)
        if norm == 0:
            raise ConfigError("direction vectors must be nonzero")
        directions[int(key)] = u / norm

    a_norms = [float(r) for r in raw.get("a_norms", [])]
    if any(not 0 <= r < 1 for r in a_norms):
        raise ConfigError("a_norms must lie in [0, 1)")

    residuals = list(raw.get("residuals", RESIDUAL_KINDS))
    unknown = set(residuals) - set(RESIDUAL_KINDS) - set(DIAGNOSTIC_KINDS)
    if unknown:
        raise ConfigError(f"unknown residual kinds: {sorted(unknown)}")

    calibration = None
    if raw.get("calibration"):
        cpath = Path(raw["calibration"])
        if base is not None and not cpath.is_absolute():
            cpath = base / cpath
        try:
            calibration = load_calibration(cpath)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read calibration file {cpath}: {exc}") from exc

    cfg_seed = raw.get("seed", 0) if seed is None else seed
    if not isinstance(cfg_seed, int) or not 0 <= cfg_seed < 2 ** 64:
        raise ConfigError("seed must be an unsigned 64-bit integer")

    return ExperimentConfig(
        raw=raw,
        spaces=spaces,
        symbols=symbols,
        takagi=takagi,
        a_norms=a_norms,
        directions=directions,
        thresholds={k: float(v) for k, v in raw.get("thresholds", {}).items()},
        calibration=calibration,
        exploratory_norm=float(raw.get("exploratory_norm", DEFAULT_EXPLORATORY_NORM)),
        normal_tol=float(raw.get("normal_tol", 1e-10)),
        nonnormal_floor=float(raw.get("nonnormal_floor", 1e-4)),
        residuals=residuals,
        seed=cfg_seed,
        digest=config_digest(raw),
    )


def config_digest(raw: Any) -> str:
    return hashlib.sha256(json.dumps(raw, sort_keys=True, default=str).encode()).hexdigest()
