"""Degree sweeps of the convergent residuals and threshold calibration.

For a Moebius symbol ``phi_a`` and truncation degree D the residuals are

``w_squared``       ``||W_D^2 - I||``, W_D the polar unitary of the truncated C_{phi_a}
``w_selfadjoint``   ``||W_D - W_D^H||``
``involution``      ``||M conj(M) - I||`` for the conjugation candidate ``J_a``
``symmetry``        relative defect of ``C = J_a C^* J_a``
``w_squared_low``   ``||W_D^2 - I||`` restricted to degrees ``<= D // 4`` (diagnostic)

all in the spectral norm. A sweep passes when its values do not increase
with D (steps at or below :data:`NOISE_FLOOR` count as non-increasing) and
the value at the largest degree is at most the calibrated threshold.

Calibration evaluates each sweep at the reference degree ``2 * max(D)`` and
freezes ``max(SAFETY * value, NOISE_FLOOR)`` as its threshold.
"""
from __future__ import annotations

import datetime as _dt
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import NotInvertible
from .hardy import SpaceSpec
from .opmatrix import csym_residual, polar_unitary
from .series import degree_array
from .symmetry import conjugation_Ja, mobius_matrix

RESIDUAL_KINDS = ("w_squared", "w_selfadjoint", "involution", "symmetry")
DIAGNOSTIC_KINDS = ("w_squared_low",)
SAFETY = 3.0
NOISE_FLOOR = 1e-12


def measure(space: SpaceSpec, a, kinds: Sequence[str] = RESIDUAL_KINDS,
            sigma_min_tol: float | None = None) -> dict[str, float]:
    """Residuals of one (space, a) cell; raises :class:`NotInvertible` if W_D is undefined."""
    a = np.atleast_1d(np.asarray(a, dtype=complex))
    T = mobius_matrix(space, a)
    out = {}
    need_w = {"w_squared", "w_selfadjoint", "w_squared_low"} & set(kinds)
    if need_w:
        W = polar_unitary(T, sigma_min_tol).M
        R = W @ W - np.eye(space.size)
        if "w_squared" in kinds:
            out["w_squared"] = float(np.linalg.norm(R, 2))
        if "w_selfadjoint" in kinds:
            out["w_selfadjoint"] = float(np.linalg.norm(W - W.conj().T, 2))
        if "w_squared_low" in kinds:
            low = degree_array(space.n, space.D) <= space.D // 4
            out["w_squared_low"] = float(np.linalg.norm(R[np.ix_(low, low)], 2))
    if {"involution", "symmetry"} & set(kinds):
        Ja = conjugation_Ja(space, a, sigma_min_tol)
        if "involution" in kinds:
            out["involution"] = Ja.involution_residual()
        if "symmetry" in kinds:
            out["symmetry"] = csym_residual(T, Ja)
    return {k: out[k] for k in kinds}


def is_nonincreasing(values: Sequence[float], floor: float = NOISE_FLOOR) -> bool:
    return all(b <= a or b <= floor for a, b in zip(values, values[1:]))


@dataclass
class Sweep:
    """One parameter cell swept over a list of degrees."""

    n: int
    s: float
    a: np.ndarray
    degrees: tuple[int, ...]
    label: str = ""

    def __post_init__(self):
        self.a = np.atleast_1d(np.asarray(self.a, dtype=complex))
        self.degrees = tuple(int(d) for d in self.degrees)

    @property
    def a_norm(self) -> float:
        return float(np.linalg.norm(self.a))

    @property
    def reference_degree(self) -> int:
        return 2 * max(self.degrees)

    def key(self) -> dict:
        return {"n": self.n, "s": self.s, "a_re": self.a.real.tolist(),
                "a_im": self.a.imag.tolist(), "degrees": list(self.degrees)}

    def space(self, D: int) -> SpaceSpec:
        return SpaceSpec(self.n, D, s=self.s)


@dataclass
class SweepResult:
    sweep: Sweep
    values: dict[str, list[float | None]]
    errors: dict[int, str] = field(default_factory=dict)

    def passed(self, kind: str, threshold: float | None) -> bool:
        vals = self.values[kind]
        if threshold is None or any(v is None for v in vals):
            return False
        return is_nonincreasing(vals) and vals[-1] <= threshold


def run_sweep(sweep: Sweep, kinds: Sequence[str] = RESIDUAL_KINDS,
              sigma_min_tol: float | None = None) -> SweepResult:
    values: dict[str, list[float | None]] = {k: [] for k in kinds}
    errors: dict[int, str] = {}
    for D in sweep.degrees:
        try:
            res = measure(sweep.space(D), sweep.a, kinds, sigma_min_tol)
        except NotInvertible as exc:
            errors[D] = str(exc)
            res = {k: None for k in kinds}
        for k in kinds:
            values[k].append(res[k])
    return SweepResult(sweep, values, errors)


def cells_hash(sweeps: Sequence[Sweep]) -> str:
    blob = json.dumps([s.key() for s in sweeps], sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()


def calibrate(sweeps: Sequence[Sweep], kinds: Sequence[str] = RESIDUAL_KINDS,
              sigma_min_tol: float | None = None, safety: float = SAFETY,
              date: str | None = None) -> dict:
    """Frozen thresholds for each sweep, measured at its reference degree."""
    cells = []
    for sw in sweeps:
        ref = sw.reference_degree
        entry = {**sw.key(), "label": sw.label, "reference_degree": ref}
        try:
            vals = measure(sw.space(ref), sw.a, kinds, sigma_min_tol)
            entry["reference_values"] = vals
            entry["thresholds"] = {k: max(safety * v, NOISE_FLOOR) for k, v in vals.items()}
            entry["error"] = None
        except NotInvertible as exc:
            entry["reference_values"] = None
            entry["thresholds"] = {k: None for k in kinds}
            entry["error"] = str(exc)
        cells.append(entry)
    return {
        "protocol": f"threshold = max({safety:g} * value at reference degree 2*max(D), {NOISE_FLOOR:g})",
        "safety_factor": safety,
        "noise_floor": NOISE_FLOOR,
        "norm": "spectral",
        "date": date or _dt.date.today().isoformat(),
        "config_sha256": cells_hash(sweeps),
        "cells": cells,
    }


def save_calibration(calib: dict, path) -> None:
    Path(path).write_text(json.dumps(calib, indent=2, sort_keys=True) + "\n")


def load_calibration(path) -> dict:
    return json.loads(Path(path).read_text())


def lookup_thresholds(calib: dict, n: int, s: float, a) -> dict[str, float | None] | None:
    """Thresholds of the calibration cell matching ``(n, s, a)``, if any."""
    a = np.atleast_1d(np.asarray(a, dtype=complex))
    for cell in calib.get("cells", []):
        if cell["n"] != n or not np.isclose(cell["s"], s) or len(cell["a_re"]) != a.size:
            continue
        ca = np.asarray(cell["a_re"]) + 1j * np.asarray(cell["a_im"])
        if np.allclose(ca, a, rtol=0, atol=1e-12):
            return cell["thresholds"]
    return None


# directions for the reference sweeps; complex ones exercise the U_Theta realignment
_DIRECTIONS = {
    1: {"real": np.array([1.0]), "complex": np.array([np.exp(1j * np.pi / 5)])},
    2: {"real": np.array([0.6, 0.8]),
        "complex": np.array([0.6j, 0.8 * np.exp(1j * np.pi / 3)])},
}


def reference_sweeps() -> list[Sweep]:
    """The frozen sweep grid: n = 1 over D in {8, 16, 32}, n = 2 over D in {6, 10, 14}."""
    grid = [(1, (1.0, 2.0, 3.0), (0.2, 0.4, 0.6), (8, 16, 32)),
            (2, (2.0, 3.0), (0.2, 0.4), (6, 10, 14))]
    out = []
    for n, ss, radii, degrees in grid:
        for s in ss:
            for r in radii:
                for kind, u in _DIRECTIONS[n].items():
                    out.append(Sweep(n, s, r * u, degrees, label=f"n={n} s={s:g} |a|={r:g} {kind}"))
    return out
