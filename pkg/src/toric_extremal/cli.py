"""Command-line front end: JSON config in, JSON report (and CSV tables) out.

Config layout::

    {
      "polytope": {"halfspaces": [{"normal": [1, 0], "offset": "0"}, ...]},
      "factors": [{"d": 1, "scal": "-8", "p": ["1", "2"], "c": "1", "kind": "free"}],
      "command": {"name": "stability-scan", "crease_normals": [[1, 1]], "grid": 100}
    }

Exit codes: 0 completed, 2 validation failure, 3 inconclusive certificate.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

from .abreu import (
    HMatrix,
    SymplecticPotential,
    abreu_scalar,
    boundary_check,
    face_positivity,
    guillemin_hmatrix,
    integrability_check,
    p_lambda,
)
from .calabi import BaseFactor, FibrationData, FibrationError, make_fibration
from .cp2bundle import (
    CP2BundleParams,
    analyze,
    ansatz_H,
    crease_scan,
    default_a_grid,
    distinguished_solution,
)
from .extremal import solve_extremal_affine
from .poly import as_fraction, poly_from_terms
from .polytope import PolytopeError, build_polytope, sample_face
from .quadrature import NoConvergence
from .report import AnalysisReport, frac_str, write_csv
from .stability import k_energy, nonexistence_scan

COMMANDS = (
    "polytope-check",
    "extremal-field",
    "abreu-eval",
    "stability-scan",
    "k-energy",
    "cp2-analyze",
    "cp2-scan",
)
CP2_COMMANDS = ("cp2-analyze", "cp2-scan")

EXIT_OK, EXIT_INVALID, EXIT_INCONCLUSIVE = 0, 2, 3


class ParseError(ValueError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line
        self.message = message


class ValidationError(ValueError):
    def __init__(self, location: str, cause: Exception):
        super().__init__(f"{location}: {type(cause).__name__}: {cause}")
        self.location = location
        self.cause = cause


@dataclass
class Config:
    polytope: Any
    fibration: Optional[FibrationData]
    command: Dict[str, Any]
    raw: Dict[str, Any] = field(default_factory=dict)


def _halfspaces(section) -> list:
    out = []
    for k, h in enumerate(section.get("halfspaces", [])):
        if "normal" not in h:
            raise ValidationError(f"polytope.halfspaces[{k}]", KeyError("normal"))
        out.append(([int(x) for x in h["normal"]], as_fraction(h.get("offset", 0))))
    return out


def _factor(spec: Dict[str, Any]) -> BaseFactor:
    return BaseFactor.make(
        spec.get("d", 1), spec.get("scal", 0), spec["p"], spec["c"], spec.get("kind", "free")
    )


def load_config(text: str) -> Config:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.lineno, exc.msg) from exc
    if not isinstance(raw, dict):
        raise ParseError(1, "top level must be an object")
    command = dict(raw.get("command", {}))
    P = None
    F = None
    if "polytope" in raw:
        try:
            P = build_polytope(_halfspaces(raw["polytope"]))
        except (PolytopeError, ValueError, TypeError) as exc:
            if isinstance(exc, ValidationError):
                raise
            raise ValidationError("polytope", exc) from exc
        factors = []
        for k, spec in enumerate(raw.get("factors", [])):
            try:
                factors.append(_factor(spec))
            except (KeyError, ValueError, TypeError) as exc:
                raise ValidationError(f"factors[{k}]", exc) from exc
        try:
            F = make_fibration(P, factors)
        except FibrationError as exc:
            raise ValidationError("factors", exc) from exc
    return Config(P, F, command, raw)


def parse_config(path) -> Config:
    """Read and validate a config file; all rationals are parsed exactly."""
    return load_config(Path(path).read_text())


def _parse_list(text: Optional[str]):
    if text is None:
        return None
    return [as_fraction(x.strip()) for x in text.split(",") if x.strip()]


def _input_echo(cfg: Config) -> Dict[str, Any]:
    return {k: cfg.raw[k] for k in ("polytope", "factors", "command") if k in cfg.raw}


def _need_fibration(cfg: Config) -> FibrationData:
    if cfg.fibration is None:
        raise ValidationError("polytope", ValueError("this command needs a polytope section"))
    return cfg.fibration


def _cp2_params(args, cfg: Optional[Config]) -> CP2BundleParams:
    sec = dict((cfg.raw.get("cp2") or {}) if cfg else {})
    for key in ("genus", "p1", "p2", "c"):
        val = getattr(args, key)
        if val is not None:
            sec[key] = val
    missing = [k for k in ("genus", "p1", "p2") if k not in sec]
    if missing:
        raise ValidationError("cp2", ValueError(f"missing {', '.join(missing)}"))
    try:
        return CP2BundleParams.from_genus(int(sec["genus"]), int(sec["p1"]), int(sec["p2"]), sec.get("c", 1))
    except ValueError as exc:
        raise ValidationError("cp2", exc) from exc


def _h_from_config(spec, P, ell: int) -> HMatrix:
    if spec in (None, "guillemin"):
        if P is None:
            raise ValidationError("command.H", ValueError("guillemin H needs a polytope"))
        return SymplecticPotential(P).h_matrix()
    if spec == "fubini_study":
        return HMatrix.fubini_study(ell)
    try:
        rows = [[poly_from_terms(ell, entry) for entry in row] for row in spec["rows"]]
        return HMatrix.exact(rows)
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError("command.H", exc) from exc


# commands


def cmd_polytope_check(cfg: Config, args) -> tuple:
    P = cfg.polytope
    if P is None:
        raise ValidationError("polytope", ValueError("missing polytope section"))
    rep = AnalysisReport("polytope-check", input=_input_echo(cfg))
    rep.computed = {
        "dim": P.dim_l,
        "n_facets": P.n_facets,
        "vertices": [[frac_str(x) for x in v] for v in P.vertices],
        "faces_by_dim": {str(k): len(P.faces_of_dim(k)) for k in range(P.dim_l + 1)},
    }
    rep.certificates["delzant"] = {"passed": True, "checked_vertices": len(P.vertices)}
    rep.verdicts["delzant"] = {"value": True, "certificate": "delzant"}
    return rep, EXIT_OK, {}


def _extremal_block(F: FibrationData) -> Dict[str, Any]:
    ext = solve_extremal_affine(F)
    return {"A": [frac_str(x) for x in ext.gradient], "B": frac_str(ext.constant)}


def cmd_extremal_field(cfg: Config, args) -> tuple:
    F = _need_fibration(cfg)
    rep = AnalysisReport("extremal-field", input=_input_echo(cfg))
    rep.computed = {"extremal_affine": _extremal_block(F)}
    return rep, EXIT_OK, {}


def cmd_abreu_eval(cfg: Config, args) -> tuple:
    F = _need_fibration(cfg)
    P = F.polytope
    H = _h_from_config(cfg.command.get("H"), P, P.dim_l)
    res = args.resolution or 20
    rep = AnalysisReport("abreu-eval", input=_input_echo(cfg))
    rep.computed = {"extremal_affine": _extremal_block(F)}
    scal = abreu_scalar(H, F)
    pl = p_lambda(H, F)
    pts = sample_face(P, P.faces[0], max(res, 3))
    rows = [
        {"z": ";".join(f"{x:.12g}" for x in z), "scal": float(scal(z)), "p_lambda": float(pl(z))}
        for z in pts
    ]
    rep.probes["scalar"] = rows
    bc = boundary_check(H, P, tol=args.tol or 1e-6)
    pos = face_positivity(H, P, res)
    integ = integrability_check(H, P)
    rep.certificates["boundary"] = bc.to_dict()
    rep.certificates["positivity"] = pos.to_dict()
    rep.certificates["integrability"] = integ.to_dict()
    extremal = {"exact": H.is_exact}
    if H.is_exact:
        extremal["p_lambda_zero"] = pl.is_zero()
    else:
        extremal["max_abs_p_lambda"] = max(abs(r["p_lambda"]) for r in rows)
    rep.certificates["extremal"] = extremal
    rep.verdicts = {
        "boundary_conditions": {"value": bc.passed, "certificate": "boundary"},
        "positive_definite": {"value": pos.positive, "certificate": "positivity"},
        "integrable": {"value": integ.integrable, "certificate": "integrability"},
    }
    if H.is_exact:
        rep.verdicts["extremal"] = {"value": extremal["p_lambda_zero"], "certificate": "extremal"}
    return rep, EXIT_OK, {"scalar": (rows, ["z", "scal", "p_lambda"])}


def cmd_stability_scan(cfg: Config, args) -> tuple:
    F = _need_fibration(cfg)
    normals = cfg.command.get("crease_normals", [[1] + [0] * (F.nvars - 1)])
    grid = int(cfg.command.get("grid", args.resolution or 100))
    verdict = nonexistence_scan(F, normals, grid=grid, tol=cfg.command.get("tol", 0))
    rep = AnalysisReport("stability-scan", input=_input_echo(cfg))
    rep.computed = {"extremal_affine": _extremal_block(F)}
    rows = [
        {
            "normal": " ".join(str(x) for x in p.normal),
            "t": frac_str(p.t),
            "value": frac_str(p.value),
            "value_float": float(p.value),
            "error": p.error,
        }
        for p in verdict.probes
    ]
    rep.probes["crease"] = rows
    rep.certificates["crease_scan"] = verdict.to_dict()
    rep.verdicts["unstable"] = {"value": verdict.status == "unstable", "certificate": "crease_scan"}
    code = EXIT_OK if verdict.status == "unstable" else EXIT_INCONCLUSIVE
    return rep, code, {"probes": (rows, ["normal", "t", "value", "value_float", "error"])}


def cmd_k_energy(cfg: Config, args) -> tuple:
    F = _need_fibration(cfg)
    P = F.polytope
    spec = cfg.command.get("potential", {})
    pert = spec.get("perturbation")
    phi = poly_from_terms(P.dim_l, pert) if pert is not None else None
    U = SymplecticPotential(P, phi, as_fraction(spec.get("t", 0)))
    tol = args.tol or 1e-9
    rep = AnalysisReport("k-energy", input=_input_echo(cfg))
    rep.computed = {"extremal_affine": _extremal_block(F)}
    try:
        E = k_energy(F, U, tol, reference=bool(spec.get("relative", False)))
    except NoConvergence as exc:
        rep.certificates["quadrature"] = {
            "converged": False,
            "estimate": exc.result.value,
            "error": exc.result.error,
            "tol": tol,
        }
        return rep, EXIT_INCONCLUSIVE, {}
    rep.computed["k_energy"] = E.to_dict()
    rep.certificates["quadrature"] = {"converged": True, "error": E.error, "tol": tol}
    return rep, EXIT_OK, {}


def cmd_cp2_analyze(cfg: Optional[Config], args) -> tuple:
    params = _cp2_params(args, cfg)
    res = args.resolution or 50
    rep = analyze(params, res, _parse_list(args.a_grid))
    if cfg is not None:
        rep.input.update(_input_echo(cfg))
    excluded = rep.verdicts["extremal_kahler_excluded"]["value"]
    almost = rep.verdicts["extremal_almost_kahler"]["value"]
    code = EXIT_OK if (excluded or almost) else EXIT_INCONCLUSIVE
    return rep, code, {"crease": (rep.probes["crease"], ["a", "value", "value_float", "error"])}


def cmd_cp2_scan(cfg: Optional[Config], args) -> tuple:
    base = _cp2_params(args, cfg)
    c_grid = _parse_list(args.c_grid) or [base.c]
    res = args.resolution or 50
    a_grid = _parse_list(args.a_grid) or default_a_grid(res)
    rows: List[Dict[str, Any]] = []
    for c in c_grid:
        try:
            P = CP2BundleParams.from_genus(base.genus, base.p1, base.p2, c)
        except ValueError as exc:
            raise ValidationError(f"c-grid entry {frac_str(c)}", exc) from exc
        H = ansatz_H(distinguished_solution(P), P)
        pos = face_positivity(H, P.fibration().polytope, res)
        scan = crease_scan(P, a_grid)
        worst_a, worst = min(scan, key=lambda av: av[1])
        rows.append(
            {
                "c": frac_str(c),
                "c_float": float(c),
                "min_eigenvalue": pos.min_eigenvalue,
                "positive": pos.positive,
                "crease_min": frac_str(worst),
                "crease_min_float": float(worst),
                "crease_argmin_a": frac_str(worst_a),
                "crease_negative": worst < 0,
            }
        )
    rep = AnalysisReport("cp2-scan")
    rep.input = {"cp2": base.to_dict(), "c_grid": [frac_str(c) for c in c_grid], "resolution": res}
    rep.probes["c_grid"] = rows
    rep.certificates["positivity_margins"] = {
        "min_eigenvalue": [r["min_eigenvalue"] for r in rows],
        "all_positive": all(r["positive"] for r in rows),
    }
    rep.certificates["crease_scan"] = {
        "normal": [1, 1],
        "n_a": len(a_grid),
        "any_negative": any(r["crease_negative"] for r in rows),
    }
    rep.verdicts = {
        "almost_kahler_on_grid": {"value": rep.certificates["positivity_margins"]["all_positive"],
                                  "certificate": "positivity_margins"},
        "kahler_excluded_somewhere": {"value": rep.certificates["crease_scan"]["any_negative"],
                                      "certificate": "crease_scan"},
    }
    cols = ["c", "c_float", "min_eigenvalue", "positive", "crease_min", "crease_min_float",
            "crease_argmin_a", "crease_negative"]
    return rep, EXIT_OK, {"c_grid": (rows, cols)}


HANDLERS = {
    "polytope-check": cmd_polytope_check,
    "extremal-field": cmd_extremal_field,
    "abreu-eval": cmd_abreu_eval,
    "stability-scan": cmd_stability_scan,
    "k-energy": cmd_k_energy,
    "cp2-analyze": cmd_cp2_analyze,
    "cp2-scan": cmd_cp2_scan,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="toric-extremal", description=__doc__.splitlines()[0])
    ap.add_argument("command", nargs="?", choices=COMMANDS,
                    help="defaults to command.name from the config")
    ap.add_argument("--config", type=Path)
    ap.add_argument("--out", type=Path, help="report path; CSV tables go next to it")
    ap.add_argument("--tol", type=float)
    ap.add_argument("--resolution", type=int)
    ap.add_argument("--c-grid", dest="c_grid", help="comma-separated, e.g. 1/4,1,4")
    ap.add_argument("--a-grid", dest="a_grid", help="comma-separated crease positions")
    ap.add_argument("--genus", type=int)
    ap.add_argument("--p1", type=int)
    ap.add_argument("--p2", type=int)
    ap.add_argument("--c", type=str)
    return ap


def _emit(rep: AnalysisReport, tables: Dict[str, tuple], out: Optional[Path]) -> None:
    text = rep.to_json()
    if out is None:
        sys.stdout.write(text)
        return
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(text)
    for name, (rows, cols) in tables.items():
        out.with_name(f"{out.stem}.{name}.csv").write_text(write_csv(rows, cols))


def run(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = parse_config(args.config) if args.config else None
        command = args.command or (cfg.command.get("name") if cfg else None)
        if command not in HANDLERS:
            print(f"error: unknown or missing command {command!r}", file=sys.stderr)
            return EXIT_INVALID
        if cfg is None and command not in CP2_COMMANDS:
            print(f"error: {command} needs --config", file=sys.stderr)
            return EXIT_INVALID
        rep, code, tables = HANDLERS[command](cfg, args)
    except (ParseError, ValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    _emit(rep, tables, args.out)
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
