"""Command-line entry point: reslab <command> [options].

Exit codes: 0 success, 1 usage or configuration error, 2 numeric failure
(with a diagnostic JSON document on stderr).
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from reslab import airy, bands, grushin_model, sphere_resonances
from reslab.complexmath import RootFindingError
from reslab.geometry import ObstacleModel, band_constants

DEFAULT_BAND_GRID = (1.0, 1e4, 64)
DEFAULT_BANDS = 3


class UsageError(Exception):
    """Bad flags or configuration; exit code 1."""


class NumericFailure(Exception):
    """A computation failed; exit code 2 with a diagnostic payload."""

    def __init__(self, message: str, payload: Optional[dict] = None):
        super().__init__(message)
        self.payload = payload or {}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def _emit(text: str, out: Optional[str]) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    path = Path(out)
    try:
        path.write_text(text)
    except OSError as exc:
        raise UsageError(f"cannot write {path}: {exc}") from exc


def _load_config(path: Optional[str]) -> dict:
    if path is None:
        return {}
    try:
        data = json.loads(Path(path).read_text())
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise UsageError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise UsageError("config must be a JSON object")
    return data


def _pick(args, cfg: dict, name: str, default=None):
    """Command-line value, else config value, else default."""
    value = getattr(args, name, None)
    if value is not None:
        return value
    return cfg.get(name, default)


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON file with command parameters")
    p.add_argument("--out", help="output path (default: standard output)")
    p.add_argument("--format", choices=("csv", "json"), help="output format")
    p.add_argument("--seed", type=int, help="random seed (default 0)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="reslab", description="Resonance bands of convex obstacles")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("airy-zeros", help="table of Ai and Ai' zeros")
    _common(p)
    p.add_argument("--j-max", dest="J_max", type=int, help="number of zeros (1..500)")

    p = sub.add_parser("bands", help="band constants and band-edge curves for an obstacle")
    _common(p)
    p.add_argument("--c-margin", dest="C_margin", type=float)
    p.add_argument("--bands", dest="n_bands", type=int, help="number of band curves")
    p.add_argument("--re-max", dest="re_max", type=float, help="largest Re lambda of the grid")

    p = sub.add_parser("sphere-resonances", help="exact resonances of a sphere")
    _common(p)
    p.add_argument("--bc", help="dirichlet, neumann or robin:ETA")
    p.add_argument("--radius", type=float)
    p.add_argument("--l-max", dest="l_max", type=int)
    p.add_argument("--tol", type=float)
    p.add_argument("--c-margin", dest="C_margin", type=float)

    p = sub.add_parser("weyl", help="band-j resonance count against the Weyl prediction")
    _common(p)
    p.add_argument("records", nargs="?", help="CSV written by sphere-resonances")
    p.add_argument("--r", type=float)
    p.add_argument("--j", type=int)
    p.add_argument("--radius", type=float)
    p.add_argument("--c-margin", dest="C_margin", type=float)

    p = sub.add_parser("grushin-demo", help="well-posedness sweep of the model Grushin problem")
    _common(p)
    p.add_argument("--lam", type=float)
    p.add_argument("--mu", type=float)
    p.add_argument("--trials", type=int)
    return parser


def cmd_airy_zeros(args, cfg) -> None:
    J = _pick(args, cfg, "J_max", 200)
    if not isinstance(J, int) or not 1 <= J <= 500:
        raise UsageError("--j-max must be an integer in [1, 500]")
    table = airy.build_zero_table(J)
    fmt = _pick(args, cfg, "format", "csv")
    if fmt == "csv":
        _emit(table.to_csv(), args.out)
        return
    ratio = table.asymptotic_ratio()
    rows = [
        {
            "j": j + 1,
            "zeta_j": float(table.zeros_ai[j]),
            "zeta_prime_j": float(table.zeros_ai_prime[j]),
            "e_j_0": float(table.boundary_values[j]),
            "norm_j": float(table.norms[j]),
            "asymptotic_ratio": float(ratio[j]),
        }
        for j in range(table.count)
    ]
    _emit(_dumps(rows), args.out)


def _obstacle(cfg: dict) -> ObstacleModel:
    obstacle = cfg.get("obstacle", cfg if "kind" in cfg else {"kind": "sphere", "radius": 1.0})
    try:
        return ObstacleModel.from_dict(obstacle)
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"invalid obstacle: {exc}") from exc


def cmd_bands(args, cfg) -> None:
    model = _obstacle(cfg)
    C = float(_pick(args, cfg, "C_margin", bands.DEFAULT_C_MARGIN))
    n_bands = int(_pick(args, cfg, "n_bands", DEFAULT_BANDS))
    re_max = float(_pick(args, cfg, "re_max", DEFAULT_BAND_GRID[1]))
    if not C > 0 or n_bands < 1 or not re_max > DEFAULT_BAND_GRID[0]:
        raise UsageError("need C_margin > 0, bands >= 1 and re_max > 1")
    table = airy.zero_table()
    if n_bands >= table.count:
        raise UsageError(f"at most {table.count - 1} bands")
    constants = band_constants(model, table)
    grid = np.geomspace(DEFAULT_BAND_GRID[0], re_max, DEFAULT_BAND_GRID[2])
    which = list(range(1, n_bands + 1))
    fmt = _pick(args, cfg, "format", "json")
    if fmt == "csv":
        _emit(bands.band_curves_csv(constants, table, grid, which, C), args.out)
        if args.out is not None:
            Path(str(args.out) + ".constants.json").write_text(_dumps(constants.to_dict()))
        return
    data = bands.band_curves(constants, table, grid, which, C)
    curves = {"Re_lambda": data[:, 0].tolist()}
    for k, j in enumerate(which):
        curves[f"band_{j}_lower"] = data[:, 1 + 2 * k].tolist()
        curves[f"band_{j}_upper"] = data[:, 2 + 2 * k].tolist()
    doc = {"obstacle": model.to_dict(), "C_margin": C, "constants": constants.to_dict(), "curves": curves}
    _emit(_dumps(doc), args.out)


def cmd_sphere(args, cfg) -> None:
    try:
        bc = sphere_resonances.BoundaryCondition.parse(_pick(args, cfg, "bc", "neumann"))
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    a = float(_pick(args, cfg, "radius", 1.0))
    l_max = _pick(args, cfg, "l_max", 20)
    tol = float(_pick(args, cfg, "tol", 1e-10))
    C = float(_pick(args, cfg, "C_margin", bands.DEFAULT_C_MARGIN))
    if not isinstance(l_max, int) or not 0 <= l_max <= sphere_resonances.L_MAX:
        raise UsageError(f"--l-max must be an integer in [0, {sphere_resonances.L_MAX}]")
    if not a > 0 or not 0 < tol <= 1e-6 or not C > 0:
        raise UsageError("need radius > 0, tol in (0, 1e-6] and C_margin > 0")
    sweep = sphere_resonances.compute_resonances(bc, a, l_max, tol, C_margin=C)
    fmt = _pick(args, cfg, "format", "csv")
    if fmt == "csv":
        _emit(sphere_resonances.records_to_csv(sweep.records), args.out)
    else:
        rows = [
            {
                "bc": r.bc,
                "l": r.l,
                "re_lambda": r.lam.real,
                "im_lambda": r.lam.imag,
                "multiplicity": r.multiplicity,
                "band_kind": r.band.kind,
                "band_index": r.band.j,
            }
            for r in sweep.records
        ]
        _emit(_dumps(rows), args.out)
    if sweep.failures:
        raise NumericFailure(
            "root finding failed for some l; partial results written",
            {"failures": [{"l": f.l, "reason": f.reason} for f in sweep.failures]},
        )


def cmd_weyl(args, cfg) -> None:
    src = _pick(args, cfg, "records")
    if src is None:
        raise UsageError("weyl needs a records file")
    try:
        text = Path(src).read_text()
        records = sphere_resonances.records_from_csv(text)
    except OSError as exc:
        raise UsageError(f"cannot read {src}: {exc}") from exc
    except (ValueError, KeyError) as exc:
        raise UsageError(f"malformed records file {src}: {exc}") from exc
    r = _pick(args, cfg, "r")
    j = int(_pick(args, cfg, "j", 1))
    a = float(_pick(args, cfg, "radius", 1.0))
    C = float(_pick(args, cfg, "C_margin", bands.DEFAULT_C_MARGIN))
    if r is None or not float(r) > 0 or j < 1 or not a > 0:
        raise UsageError("need --r > 0, --j >= 1 and radius > 0")
    family = "dirichlet" if any(rec.bc == "dirichlet" for rec in records) else "neumann"
    table = airy.zero_table()
    constants = sphere_resonances.sphere_constants(a, table)
    try:
        w = sphere_resonances.weyl_count(records, float(r), j, constants, table, C_margin=C, family=family, radius=a)
    except sphere_resonances.IncompleteRecordsError as exc:
        raise UsageError(str(exc)) from exc
    d = w.to_dict()
    if isinstance(d["ratio"], float) and math.isnan(d["ratio"]):
        d["ratio"] = None
    _emit(_dumps(d), args.out)


def cmd_grushin_demo(args, cfg) -> None:
    seed = int(_pick(args, cfg, "seed", 0))
    lam = float(_pick(args, cfg, "lam", 0.0))
    mu = float(_pick(args, cfg, "mu", 1.0))
    z = cfg.get("z", 0.0)
    z = complex(*z) if isinstance(z, (list, tuple)) else complex(z)
    C1 = float(cfg.get("C1", grushin_model.DEFAULT_C1))
    trials = int(_pick(args, cfg, "trials", 100))
    sweep = cfg.get("lambda_sweep", [0.0, 10.0, 40.0, 160.0])
    try:
        params = grushin_model.ModelParameters(lam, z, mu, C1)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    if trials < 100:
        raise UsageError("--trials must be at least 100")
    report = grushin_model.verify_wellposedness(params, trials=trials, seed=seed, lambda_sweep=sweep)
    _emit(report.to_json() + "\n", args.out)
    if not report.passed:
        raise NumericFailure("well-posedness bound not met", {"slope": report.slope})


COMMANDS = {
    "airy-zeros": cmd_airy_zeros,
    "bands": cmd_bands,
    "sphere-resonances": cmd_sphere,
    "weyl": cmd_weyl,
    "grushin-demo": cmd_grushin_demo,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError("a command is required: " + ", ".join(COMMANDS))
        cfg = _load_config(args.config)
        COMMANDS[args.command](args, cfg)
    except UsageError as exc:
        sys.stderr.write(f"reslab: error: {exc}\n")
        return 1
    except ValueError as exc:
        sys.stderr.write(f"reslab: error: {exc}\n")
        return 1
    except NumericFailure as exc:
        sys.stderr.write(_dumps({"error": str(exc), **exc.payload}))
        return 2
    except (ArithmeticError, RootFindingError, np.linalg.LinAlgError) as exc:
        sys.stderr.write(_dumps({"error": type(exc).__name__, "message": str(exc)}))
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
