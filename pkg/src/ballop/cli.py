"""Command-line harness: ``ballop symcheck|normality|takagi|convergence|basis|calibrate``.

Exit codes: 0 every calibrated cell passes, 1 some calibrated cell fails,
2 invalid configuration or cell precondition, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import logging
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from . import __version__
from .config import ConfigError, ExperimentConfig, SpaceCell, load_config
from .errors import BallopError, InvalidArgument, NotInvertible
from .hardy import beta as beta_m
from .lfm import LinearFractionalMap, linear_map, mobius
from .opmatrix import composition_matrix, normality_residual
from .report import ReportRow, header_comments, render_csv, write_json, write_text
from .series import degree_array
from .symmetry import (DEFAULT_LINEAR_THRESHOLDS, DEFAULT_MOBIUS_THRESHOLDS, RESIDUALS,
                       certify, constructed_cell, jv_pipeline, search_conjugation_2x2)
from .sweep import (NOISE_FLOOR, RESIDUAL_KINDS, Sweep, calibrate, lookup_thresholds,
                    run_sweep, save_calibration)

log = logging.getLogger("ballop")

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3
TAKAGI_TOL = 1e-10


def _pool_map(fn: Callable, items: Sequence, threads: int) -> list:
    # results come back in input order whatever the completion order
    if threads <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _timed(fn, *args, **kw):
    t0 = time.perf_counter()
    out = fn(*args, **kw)
    return out, 1e3 * (time.perf_counter() - t0)


def _fmt_vec(v) -> str:
    v = np.atleast_1d(v)
    parts = []
    for x in v.ravel():
        x = complex(x)
        parts.append(f"{x.real:g}" if x.imag == 0 else f"{x.real:g}{x.imag:+g}j")
    return "(" + " ".join(parts) + ")"


def _symbol_label(sym: dict) -> str:
    if sym["kind"] == "mobius":
        return f"mobius a={_fmt_vec(sym['a'])}"
    if sym["kind"] == "linear":
        return f"linear V={_fmt_vec(sym['V'])}"
    return "lfm"


def _symbol_dim(sym: dict) -> int:
    return {"mobius": lambda: sym["a"].size, "linear": lambda: sym["V"].shape[0],
            "lfm": lambda: sym["A"].shape[0]}[sym["kind"]]()


def _build_symbol(sym: dict) -> LinearFractionalMap:
    if sym["kind"] == "mobius":
        return mobius(sym["a"])
    if sym["kind"] == "linear":
        return linear_map(sym["V"])
    return LinearFractionalMap(sym["A"], sym["B"], sym["C"], sym["d"])


def _validate_symbols(cfg: ExperimentConfig) -> None:
    for i, sym in enumerate(cfg.symbols):
        try:
            _build_symbol(sym)
        except BallopError as exc:
            raise ConfigError(f"symbol cell {i}: {exc}") from exc


def _exit_code(rows: Sequence[ReportRow]) -> int:
    counted = [r for r in rows if not r.exploratory]
    if any(r.status == "ERROR" and "precondition" in r.message for r in counted):
        return EXIT_CONFIG
    if any(r.status == "ERROR" for r in counted):
        return EXIT_NUMERIC
    if any(r.status == "FAIL" for r in counted):
        return EXIT_FAIL
    return EXIT_OK


def _emit(args, cfg: ExperimentConfig, command: str, rows: list[ReportRow],
          certificates: list | None = None, extra: dict[str, str] | None = None) -> int:
    out = Path(args.out)
    comments = header_comments(command, cfg.digest, cfg.seed)
    write_text(out / "report.csv", render_csv(rows, comments, timings=args.timings))
    if certificates is not None:
        write_json(out / "certificates.json", certificates)
    for name, text in (extra or {}).items():
        write_text(out / name, text)
    code = _exit_code(rows)
    n_pass = sum(r.passed for r in rows)
    log.info("%s: %d rows, %d PASS, exit %d, reports in %s", command, len(rows), n_pass, code, out)
    return code


# --- symcheck ---------------------------------------------------------------

def _mobius_thresholds(cfg: ExperimentConfig, space: SpaceCell, a) -> tuple[dict, str | None]:
    thr = dict(DEFAULT_MOBIUS_THRESHOLDS)
    thr.update({k: v for k, v in cfg.thresholds.items() if k in RESIDUALS})
    source = None
    if cfg.calibration is not None and space.s is not None:
        found = lookup_thresholds(cfg.calibration, space.n, space.s, a)
        if found:
            for k in ("involution", "symmetry"):
                if found.get(k) is not None:
                    thr[k] = found[k]
            source = (f"calibration {cfg.calibration.get('config_sha256', '')[:12]} "
                      f"({cfg.calibration.get('date', '')})")
    return thr, source


def cmd_symcheck(args, cfg: ExperimentConfig) -> int:
    _validate_symbols(cfg)
    cells = []
    for space in cfg.spaces:
        for sym in cfg.symbols:
            if sym["kind"] != "mobius" or sym["a"].size != space.n:
                continue
            for D in space.degrees:
                cells.append((space, sym, D))

    def run(cell):
        space, sym, D = cell
        sp = space.at(D)
        thr, source = _mobius_thresholds(cfg, space, sym["a"])
        try:
            cert, ms = _timed(certify, sp, sym["a"], thr, calibration=source)
            return cert, ms, None
        except NotInvertible as exc:
            return None, 0.0, str(exc)

    results = _pool_map(run, cells, args.threads)
    rows, certs = [], []
    for idx, ((space, sym, D), (cert, ms, err)) in enumerate(zip(cells, results)):
        exploratory = bool(np.linalg.norm(sym["a"]) > cfg.exploratory_norm)
        common = dict(command="symcheck", cell=idx, n=space.n, weight=space.weight, D=D,
                      symbol=_symbol_label(sym), exploratory=exploratory,
                      basis_size=space.at(D).size, wall_ms=ms)
        if err is not None:
            for k in RESIDUALS:
                rows.append(ReportRow(residual=k, value=None, exactness="", threshold=None,
                                      status="ERROR", message=err, **common))
            certs.append({"cell": idx, "space": space.at(D).describe(),
                          "symbol": _symbol_label(sym), "error": err, "exploratory": exploratory})
            continue
        for k in RESIDUALS:
            rows.append(ReportRow(residual=k, value=cert.residuals[k],
                                  exactness=cert.exactness[k], threshold=cert.thresholds[k],
                                  **common))
        certs.append({"cell": idx, "exploratory": exploratory, **cert.to_dict()})
    return _emit(args, cfg, "symcheck", rows, certs)


# --- normality --------------------------------------------------------------

def _commutator_norm(A) -> float:
    return float(np.linalg.norm(A @ A.conj().T - A.conj().T @ A, 2))


def cmd_normality(args, cfg: ExperimentConfig) -> int:
    _validate_symbols(cfg)
    cells = [(space, sym, D) for space in cfg.spaces for sym in cfg.symbols
             if _symbol_dim(sym) == space.n for D in space.degrees]

    def run(cell):
        space, sym, D = cell
        psi = _build_symbol(sym)
        T, ms = _timed(composition_matrix, space.at(D), psi)
        return psi, normality_residual(T), ms

    rows = []
    for idx, ((space, sym, D), (psi, res, ms)) in enumerate(
            zip(cells, _pool_map(run, cells, args.threads))):
        predicted = psi.is_linear and _commutator_norm(psi.A) < cfg.normal_tol
        observed = res < cfg.normal_tol
        agree = predicted == observed
        if not psi.is_linear:
            agree = agree and res > cfg.nonnormal_floor
        exactness = "exact" if psi.is_linear else "convergent"
        common = dict(command="normality", cell=idx, n=space.n, weight=space.weight, D=D,
                      symbol=_symbol_label(sym), basis_size=space.at(D).size, wall_ms=ms)
        rows.append(ReportRow(residual="normality", value=res, exactness=exactness,
                              threshold=None, status="NORMAL" if observed else "NONNORMAL",
                              **common))
        rows.append(ReportRow(residual="classification_mismatch", value=0.0 if agree else 1.0,
                              exactness=exactness, threshold=0.0,
                              message=f"predicted {'normal' if predicted else 'non-normal'}",
                              **common))
    return _emit(args, cfg, "normality", rows)


# --- takagi -----------------------------------------------------------------

def _takagi_cells(cfg: ExperimentConfig):
    cells = []
    for ci, cell in enumerate(cfg.takagi):
        if cell.get("construct"):
            for k in range(cell["count"]):
                rng = np.random.default_rng([cfg.seed, ci, k])
                V, K = constructed_cell(cell["n"], rng)
                cells.append((f"constructed #{k}", V, K))
        elif "K" in cell:
            cells.append(("given K", cell["V"], cell["K"]))
        else:
            if cell["V"].shape != (2, 2):
                raise ConfigError(f"takagi cell {ci}: K search is available for 2x2 V only")
            K, _ = search_conjugation_2x2(cell["V"], seed=cfg.seed)
            cells.append(("searched K", cell["V"], K))
    return cells


def cmd_takagi(args, cfg: ExperimentConfig) -> int:
    cells = []
    for label, V, K in _takagi_cells(cfg):
        spaces = [s for s in cfg.spaces if s.n == V.shape[0]]
        if not spaces:
            raise ConfigError(f"no space cell with n={V.shape[0]} for takagi cell {label}")
        cells.extend((label, V, K, space, D) for space in spaces for D in space.degrees)
    thr = dict(DEFAULT_LINEAR_THRESHOLDS)
    thr.update({k: v for k, v in cfg.thresholds.items() if k in RESIDUALS})

    def run(cell):
        label, V, K, space, D = cell
        try:
            cert, ms = _timed(jv_pipeline, space.at(D), V, K, TAKAGI_TOL, thr)
            return cert, ms, None
        except (InvalidArgument, BallopError) as exc:
            return None, 0.0, f"precondition violated: {exc}"
        except np.linalg.LinAlgError as exc:
            return None, 0.0, f"numerical failure: {exc}"

    rows, certs = [], []
    names = ("takagi", "symmetrization") + RESIDUALS
    for idx, (cell, (cert, ms, err)) in enumerate(zip(cells, _pool_map(run, cells, args.threads))):
        label, V, K, space, D = cell
        common = dict(command="takagi", cell=idx, n=space.n, weight=space.weight, D=D,
                      symbol=f"{label} V={_fmt_vec(V)}", basis_size=space.at(D).size, wall_ms=ms)
        if err is not None:
            log.error("takagi cell %d: %s", idx, err)
            for k in names:
                rows.append(ReportRow(residual=k, value=None, exactness="exact", threshold=None,
                                      status="ERROR", message=err, **common))
            certs.append({"cell": idx, "symbol": common["symbol"], "error": err})
            continue
        values = {"takagi": cert.diagnostics["takagi"],
                  "symmetrization": cert.diagnostics["symmetrization"], **cert.residuals}
        limits = {"takagi": TAKAGI_TOL, "symmetrization": TAKAGI_TOL, **cert.thresholds}
        for k in names:
            rows.append(ReportRow(residual=k, value=values[k], exactness="exact",
                                  threshold=limits[k], **common))
        certs.append({"cell": idx, **cert.to_dict()})
    return _emit(args, cfg, "takagi", rows, certs)


# --- convergence / calibrate ------------------------------------------------

def _sweeps(cfg: ExperimentConfig) -> list[Sweep]:
    sweeps = []
    for space in cfg.spaces:
        if space.s is None:
            raise ConfigError("convergence sweeps need spaces given by s")
        if not space.degrees:
            raise ConfigError(f"space n={space.n} s={space.s:g} has no degree list")
        u = cfg.directions.get(space.n)
        if u is None:
            u = np.zeros(space.n)
            u[0] = 1.0
        if u.size != space.n:
            raise ConfigError(f"direction for n={space.n} has {u.size} entries")
        for r in cfg.a_norms:
            sweeps.append(Sweep(space.n, space.s, r * u, space.degrees,
                                label=f"n={space.n} s={space.s:g} |a|={r:g}"))
    if not sweeps:
        raise ConfigError("convergence needs spaces, degrees and a_norms")
    return sweeps


def cmd_convergence(args, cfg: ExperimentConfig) -> int:
    sweeps = _sweeps(cfg)
    kinds = cfg.residuals
    results = _pool_map(lambda sw: _timed(run_sweep, sw, kinds), sweeps, args.threads)
    lines = ["n,s,a_norm,D,residual_name,value,status"]
    rows = []
    for idx, (sw, (res, ms)) in enumerate(zip(sweeps, results)):
        for kind in kinds:
            for D, v in zip(sw.degrees, res.values[kind]):
                status = "ok" if v is not None else "not-invertible"
                val = "nan" if v is None else f"{v:.9e}"
                lines.append(f"{sw.n},{sw.s:g},{sw.a_norm:g},{D},{kind},{val},{status}")
        thr = dict(cfg.thresholds)
        if cfg.calibration is not None:
            found = lookup_thresholds(cfg.calibration, sw.n, sw.s, sw.a) or {}
            thr.update({k: v for k, v in found.items() if v is not None})
        exploratory = sw.a_norm > cfg.exploratory_norm
        for kind in kinds:
            vals = res.values[kind]
            common = dict(command="convergence", cell=idx, n=sw.n, weight=f"{sw.s:g}",
                          D=max(sw.degrees), symbol=f"mobius a={_fmt_vec(sw.a)}",
                          exactness="convergent", exploratory=exploratory, wall_ms=ms)
            if any(v is None for v in vals):
                msg = "; ".join(f"D={D}: {e}" for D, e in res.errors.items())
                rows.append(ReportRow(residual=kind, value=None, threshold=thr.get(kind),
                                      status="ERROR", message=msg, **common))
                continue
            rise = max([b - a for a, b in zip(vals, vals[1:]) if b > NOISE_FLOOR] + [0.0])
            rows.append(ReportRow(residual=kind, value=vals[-1], threshold=thr.get(kind),
                                  basis_size=sw.space(max(sw.degrees)).size, **common))
            rows.append(ReportRow(residual=f"{kind}:increase", value=rise,
                                  threshold=0.0, **common))
    return _emit(args, cfg, "convergence", rows,
                 extra={"convergence.csv": "\n".join(lines) + "\n"})


def cmd_calibrate(args, cfg: ExperimentConfig) -> int:
    kinds = [k for k in cfg.residuals if k in RESIDUAL_KINDS]
    calib = calibrate(_sweeps(cfg), kinds)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    save_calibration(calib, out / "calibration.json")
    failed = [c["label"] for c in calib["cells"] if c["error"]]
    for label in failed:
        log.warning("calibration cell %s: reference degree not invertible", label)
    log.info("wrote %s (%d cells)", out / "calibration.json", len(calib["cells"]))
    return EXIT_NUMERIC if failed else EXIT_OK


# --- basis ------------------------------------------------------------------

def cmd_basis(args, cfg: ExperimentConfig) -> int:
    lines = ["n,weight,D,index,alpha,degree,norm_sq,beta"]
    for space in cfg.spaces:
        for D in space.degrees:
            sp = space.at(D)
            deg = degree_array(sp.n, sp.D)
            for i, (alpha, nsq) in enumerate(zip(sp.basis, sp.norms_sq)):
                a = " ".join(map(str, alpha))
                lines.append(f"{sp.n},{space.weight},{D},{i},{a},{deg[i]},{nsq:.15e},"
                             f"{beta_m(sp, int(deg[i])):.15e}")
    text = "\n".join(lines) + "\n"
    write_text(Path(args.out) / "basis.csv", text)
    if args.print:
        sys.stdout.write(text)
    return EXIT_OK


COMMANDS = {
    "symcheck": cmd_symcheck,
    "normality": cmd_normality,
    "takagi": cmd_takagi,
    "convergence": cmd_convergence,
    "basis": cmd_basis,
    "calibrate": cmd_calibrate,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ballop",
        description="Truncated composition operators on weighted Hardy spaces of the ball.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="JSON (or TOML) experiment config")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
        p.add_argument("--out", default=None, help="output directory (default: ./reports)")
        p.add_argument("--threads", type=int, default=None,
                       help="worker threads (default: $BALLOP_THREADS or 1)")
        p.add_argument("--timings", action="store_true",
                       help="add a wall_ms column to report.csv (breaks byte-reproducibility)")
        p.add_argument("-v", "--verbose", action="store_true")
        if name == "basis":
            p.add_argument("--print", action="store_true", help="also write the table to stdout")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(message)s")
    if args.threads is None:
        try:
            args.threads = int(os.environ.get("BALLOP_THREADS", "1"))
        except ValueError:
            log.error("BALLOP_THREADS must be an integer")
            return EXIT_CONFIG
    args.threads = max(1, args.threads)
    try:
        cfg = load_config(args.config, seed=args.seed)
        if args.out is None:
            args.out = Path(args.config).parent / cfg.raw["out"] if "out" in cfg.raw else "reports"
        return COMMANDS[args.command](args, cfg)
    except ConfigError as exc:
        log.error("invalid config: %s", exc)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
