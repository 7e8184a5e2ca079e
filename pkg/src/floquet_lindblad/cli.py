"""Command-line front end.

    engine <command> --model <path> --out <path> [--slices N] [--cutoff L] [--seed S] [--json]

Exit codes: 0 success, 2 usage, 3 parse failure, 4 model validation failure,
5 solver or configuration failure, 6 verification failure. Every failure
after argument parsing writes a JSON error record to ``<out>.error.json``.
"""
from __future__ import annotations

import argparse
import csv
import io as _io
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ConfigurationError, EngineError, ValidationError
from .io import ParseError, read_json, model_from_dict
from .model import LindbladModel, ensure_valid
from .optics import band_model_from_dict, sweep
from .propagator import PropagatorConfig, floquet_operator
from .sambe import SambeConfig, build_sf_hamiltonian, edge_weight, sf_quasienergies, sf_steady_state
from .spectral import SPECTRUM_COLUMNS, decompose, extract_ness, spectrum_rows
from .verification import default_ensemble, run_theorem_suite

EXIT_OK, EXIT_USAGE, EXIT_PARSE, EXIT_VALIDATION, EXIT_SOLVER, EXIT_VERIFY = 0, 2, 3, 4, 5, 6
COMMANDS = ("spectrum", "ness", "sambe", "optics", "verify")
TOLERANCE_KEYS = ("eps_mod", "steady_tol", "cluster_tol", "rank_tol")


class VerificationFailed(EngineError):
    """At least one property check failed."""


@dataclass
class RunConfig:
    command: str
    model_path: Path | None
    output_path: Path
    propagator: PropagatorConfig = field(default_factory=PropagatorConfig)
    sambe: SambeConfig = field(default_factory=SambeConfig)
    seed: int = 0
    size: int = 100
    tolerances: dict = field(default_factory=dict)
    emit_json: bool = False


def fmt(x) -> str:
    """Round-trip exact, platform independent number formatting."""
    return format(float(x), ".17g")


# ----------------------------------------------------------------------------- output helpers


@dataclass
class Table:
    columns: tuple[str, ...]
    rows: list[list]
    notes: list[str] = field(default_factory=list)
    footer: list | None = None
    meta: dict = field(default_factory=dict)

    def to_csv(self) -> str:
        buf = _io.StringIO()
        for note in self.notes:
            buf.write(f"# {note}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for row in self.rows + ([self.footer] if self.footer else []):
            w.writerow([fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])
        return buf.getvalue()

    def to_json(self) -> str:
        doc = {
            "notes": self.notes,
            "meta": self.meta,
            "columns": list(self.columns),
            "rows": [dict(zip(self.columns, _plain(r))) for r in self.rows],
        }
        if self.footer:
            doc["footer"] = dict(zip(self.columns, _plain(self.footer)))
        return json.dumps(doc, indent=2, sort_keys=False) + "\n"


def _plain(row):
    return [float(v) if isinstance(v, (float, np.floating)) else int(v) if isinstance(v, np.integer) else v for v in row]


def _write(cfg: RunConfig, text: str, table: Table | None = None) -> None:
    cfg.output_path.write_text(text)
    if cfg.emit_json and table is not None:
        cfg.output_path.with_name(cfg.output_path.name + ".json").write_text(table.to_json())


# ----------------------------------------------------------------------------- commands


def _load_model(cfg: RunConfig) -> tuple[LindbladModel, dict]:
    doc = read_json(cfg.model_path)
    model = ensure_valid(model_from_dict(doc))
    return model, doc


def run_spectrum(cfg: RunConfig) -> int:
    model, _ = _load_model(cfg)
    uf = floquet_operator(model, cfg.propagator)
    spec = decompose(uf, model.period, **cfg.tolerances)
    rows = [[r[c] for c in SPECTRUM_COLUMNS] for r in spectrum_rows(spec)]
    notes = [f"slices_per_period={cfg.propagator.slices_per_period} scheme={cfg.propagator.scheme} "
             f"t0={fmt(cfg.propagator.t0)} period={fmt(model.period)}"]
    table = Table(SPECTRUM_COLUMNS, rows, notes)
    _write(cfg, table.to_csv(), table)
    return EXIT_OK


def run_ness(cfg: RunConfig) -> int:
    model, _ = _load_model(cfg)
    uf = floquet_operator(model, cfg.propagator)
    spec = decompose(uf, model.period, **cfg.tolerances)
    ness = extract_ness(spec, uf, model, cfg.propagator)
    n = model.dim
    cols = ["t"] + [f"{part}_rho_{i + 1}{j + 1}" for i in range(n) for j in range(n) for part in ("re", "im")]
    traj = ness.trajectory or (ness.rho0,)
    times = ness.times if ness.times.size else np.array([cfg.propagator.t0])
    rows = []
    for t, rho in zip(times, traj):
        row = [float(t)]
        for i in range(n):
            for j in range(n):
                row += [float(rho[i, j].real), float(rho[i, j].imag)]
        rows.append(row)
    notes = [f"steady_dim={ness.steady_dim} fixed_point_residual={fmt(ness.fixed_point_residual)}",
             f"slices_per_period={cfg.propagator.slices_per_period} period={fmt(model.period)}"]
    table = Table(tuple(cols), rows, notes, meta={"steady_dim": ness.steady_dim,
                                                  "fixed_point_residual": ness.fixed_point_residual})
    _write(cfg, table.to_csv(), table)
    return EXIT_OK


def run_sambe(cfg: RunConfig) -> int:
    model, _ = _load_model(cfg)
    if model.is_closed:
        sf = build_sf_hamiltonian(model, cfg.sambe)
        rows = [[k, float(e), float(edge_weight(v, sf.dim, sf.cutoff))] for k, (e, v) in enumerate(sf_quasienergies(sf))]
        table = Table(("index", "quasienergy", "edge_weight"), rows,
                      [f"closed model; cutoff={cfg.sambe.cutoff} mode={cfg.sambe.mode} omega={fmt(model.omega)}"])
    else:
        ss = sf_steady_state(model, cfg.sambe)
        rows = []
        for l, blk in sorted(ss.blocks.items()):
            for i in range(blk.shape[0]):
                for j in range(blk.shape[1]):
                    rows.append([l, i + 1, j + 1, float(blk[i, j].real), float(blk[i, j].imag)])
        table = Table(("harmonic", "row", "col", "re", "im"), rows,
                      [f"steady-state Fourier blocks; cutoff={cfg.sambe.cutoff} mode={cfg.sambe.mode} "
                       f"residual={fmt(ss.residual)}"])
    _write(cfg, table.to_csv(), table)
    return EXIT_OK


OPTICS_COLUMNS = ("k", "sigma_x", "sigma_y", "sigma_z", "j_dc", "re_j_shg", "im_j_shg")


def run_optics(cfg: RunConfig) -> int:
    model, defaulted = band_model_from_dict(read_json(cfg.model_path))
    resp = sweep(model)
    rows = [
        [float(k), *map(float, s), float(dc), float(c.real), float(c.imag)]
        for k, s, dc, c in zip(resp.k, resp.sigma_ss, resp.j_dc, resp.j_shg)
    ]
    beta_note = "beta=inf (default: absent from band file)" if defaulted else f"beta={fmt(model.beta)}"
    notes = [beta_note, f"points={model.size} omega={fmt(model.omega)} gamma0={fmt(model.gamma0)}",
             "last row: weighted totals (k, sigma columns empty)"]
    footer = ["total", "", "", "", resp.total_dc, resp.total_shg.real, resp.total_shg.imag]
    table = Table(OPTICS_COLUMNS, rows, notes, footer,
                  meta={"beta": "inf" if math.isinf(model.beta) else model.beta, "beta_defaulted": defaulted})
    _write(cfg, table.to_csv(), table)
    return EXIT_OK


def run_verify(cfg: RunConfig) -> int:
    models = default_ensemble(cfg.seed, cfg.size)
    report = run_theorem_suite(models, cfg.propagator, seed=cfg.seed)
    header = [f"seed={cfg.seed} ensemble={report.size} slices_per_period={cfg.propagator.slices_per_period}"]
    text = "\n".join(header + report.lines()) + "\n"
    cfg.output_path.write_text(text)
    if cfg.emit_json:
        doc = {
            "seed": cfg.seed,
            "ensemble": report.size,
            "passed": report.passed,
            "checks": [
                {"name": c.name, "passed": c.passed, "models": c.count, "worst": c.worst,
                 "tolerance": c.tolerance, "failures": [[i, str(v)] for i, v in c.failures]}
                for c in report.checks
            ],
        }
        cfg.output_path.with_name(cfg.output_path.name + ".json").write_text(json.dumps(doc, indent=2) + "\n")
    if not report.passed:
        raise VerificationFailed("; ".join(line for line in report.lines() if line.startswith("FAIL")))
    return EXIT_OK


DISPATCH = {"spectrum": run_spectrum, "ness": run_ness, "sambe": run_sambe, "optics": run_optics, "verify": run_verify}


# ----------------------------------------------------------------------------- argument handling


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="engine", description="Floquet-Lindblad spectra, steady states and optics")
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--model", type=Path, help="model JSON (band JSON for optics); not used by verify")
    p.add_argument("--out", type=Path, required=True, help="output file")
    p.add_argument("--slices", type=int, help="slices per period (overrides the model file)")
    p.add_argument("--cutoff", type=int, help="harmonic cutoff L for the sambe command")
    p.add_argument("--mode", choices=("full", "rwa"), help="sambe mode")
    p.add_argument("--seed", type=int, default=0, help="ensemble seed for verify")
    p.add_argument("--size", type=int, default=100, help="ensemble size for verify")
    p.add_argument("--tol", action="append", default=[], metavar="NAME=VALUE",
                   help=f"spectral tolerance override ({', '.join(TOLERANCE_KEYS)})")
    p.add_argument("--json", action="store_true", help="also write <out>.json")
    return p


def _section(doc: dict, name: str) -> dict:
    sec = doc.get(name, {}) if doc else {}
    if not isinstance(sec, dict):
        raise ParseError(f"'{name}' section must be an object")
    return sec


def make_config(args, parser) -> RunConfig:
    if args.command != "verify" and args.model is None:
        parser.error(f"{args.command} requires --model")
    tolerances = {}
    for item in args.tol:
        name, _, value = item.partition("=")
        if name not in TOLERANCE_KEYS or not value:
            parser.error(f"bad --tol {item!r}; expected one of {', '.join(TOLERANCE_KEYS)} as NAME=VALUE")
        try:
            tolerances[name] = float(value)
        except ValueError:
            parser.error(f"bad --tol value {value!r}")
    return RunConfig(args.command, args.model, args.out, seed=args.seed, size=args.size,
                     tolerances=tolerances, emit_json=args.json)


def _resolve_solver_settings(cfg: RunConfig, args) -> None:
    """Merge optional propagator/sambe sections of the model file with CLI flags."""
    doc = read_json(cfg.model_path) if cfg.model_path is not None and cfg.command not in ("optics",) else {}
    prop = dict(_section(doc, "propagator"))
    if args.slices is not None:
        prop["slices_per_period"] = args.slices
    sam = dict(_section(doc, "sambe"))
    if args.cutoff is not None:
        sam["cutoff"] = args.cutoff
    if args.mode is not None:
        sam["mode"] = args.mode
    try:
        cfg.propagator = PropagatorConfig(**prop)
        cfg.sambe = SambeConfig(**sam)
    except TypeError as exc:
        raise ParseError(f"unknown solver setting: {exc}") from exc


def exit_code_for(exc: BaseException) -> int:
    if isinstance(exc, ParseError):
        return EXIT_PARSE
    if isinstance(exc, ValidationError):
        return EXIT_VALIDATION
    if isinstance(exc, VerificationFailed):
        return EXIT_VERIFY
    return EXIT_SOLVER


def _error_record(cfg: RunConfig, exc: BaseException, code: int) -> dict:
    return {
        "command": cfg.command,
        "exit_code": code,
        "error": type(exc).__name__,
        "message": str(exc),
        "report": list(getattr(exc, "report", [])),
        "model": None if cfg.model_path is None else str(cfg.model_path),
    }


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    cfg = make_config(args, parser)
    try:
        _resolve_solver_settings(cfg, args)
        return DISPATCH[cfg.command](cfg)
    except (EngineError, ConfigurationError, np.linalg.LinAlgError, ArithmeticError, ValueError) as exc:
        code = exit_code_for(exc)
        record = _error_record(cfg, exc, code)
        text = json.dumps(record, indent=2) + "\n"
        try:
            cfg.output_path.with_name(cfg.output_path.name + ".error.json").write_text(text)
        except OSError:
            pass
        sys.stderr.write(text)
        return code


if __name__ == "__main__":
    sys.exit(main())
