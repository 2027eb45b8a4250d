"""Command-line entry point: ``hestonvvix <command> [options]``.

Commands print CSV or JSON to stdout, or to ``--out``. Exit codes: 0 success,
2 input or numerical error, 3 calibration not converged.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from .calibration import (
    CalibrationSpec,
    OptimizerSettings,
    VvixMode,
    WeightScheme,
    calibrate,
    read_quotes_csv,
    spec_summary,
)
from .errors import HestonVvixError
from .mc import mc_vix_future, mc_vix_option, mc_vvix_log
from .model import PRESETS, MarketConvention, load_params
from .pde import TABLE2_LADDER, pde_vvix
from .replication import DEFAULT_DK, DEFAULT_KMAX, default_vix_option_grid, vvix_by_replication
from .vix import vix_future, vix_option, vvix_log_contract, vvix_simple

log = logging.getLogger("hestonvvix")

EXIT_OK = 0
EXIT_ERROR = 2
EXIT_NOT_CONVERGED = 3
MC_SIGMAS = 3.0


class CliError(Exception):
    """Bad command-line input."""


# --- output -----------------------------------------------------------------

def _cell(value):
    if isinstance(value, float):
        return "nan" if math.isnan(value) else repr(value)
    return "" if value is None else str(value)


def format_rows(rows: list[dict], fmt: str) -> str:
    if fmt == "json":
        return json.dumps(rows, indent=2, sort_keys=False, allow_nan=True) + "\n"
    buf = io.StringIO()
    fields = list(rows[0]) if rows else []
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(fields)
    for row in rows:
        writer.writerow([_cell(row.get(f)) for f in fields])
    return buf.getvalue()


def _parse_cell(text: str):
    if text == "":
        return None
    if text in ("True", "False"):
        return text == "True"
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def read_rows(text: str, fmt: str) -> list[dict]:
    """Inverse of :func:`format_rows`."""
    if fmt == "json":
        return json.loads(text)
    return [{k: _parse_cell(v) for k, v in row.items()} for row in csv.DictReader(io.StringIO(text))]


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


# --- argument helpers -------------------------------------------------------

def _grid(text: str) -> tuple[int, int, int]:
    try:
        n, m, l_ = (int(p) for p in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"--grid expects N,M,L integers, got {text!r}") from None
    return n, m, l_


def _sweep(text: str) -> tuple[float, float, float]:
    try:
        lo, hi, step = (float(p) for p in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"--sweep expects lo:hi:step, got {text!r}") from None
    if not (0 < lo <= hi and step > 0):
        raise argparse.ArgumentTypeError("--sweep needs 0 < lo <= hi and step > 0")
    return lo, hi, step


def _pair(text: str) -> tuple[float, float]:
    try:
        w, t = (float(p) for p in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"--vvix-penalty expects weight,target, got {text!r}") from None
    return w, t


def _resolve_params(source: str, rho: float | None):
    params, conv = load_params(source)
    if rho is not None:
        params = params.replace(rho=rho)
    return params, conv


def _name(source: str) -> str:
    return source if source.lower() in PRESETS else Path(source).stem


# --- commands ---------------------------------------------------------------

def _vvix_row(name, params, conv, k1s, kmax, dk) -> dict:
    T = conv.delta
    row = {
        "set": name,
        "F_VIX": vix_future(params, T, conv).points,
        "log_contract": vvix_log_contract(params, T, conv).points,
    }
    for k1 in k1s:
        grid = default_vix_option_grid(k1, kmax, dk)
        row[f"replication_k1_{k1:g}"] = vvix_by_replication(params, T, conv, grid).points
    row["simple"] = vvix_simple(params, T, conv).points
    return row


def _mc_columns(row, params, conv, paths, seed) -> bool:
    T = conv.delta
    fut = mc_vix_future(params, T, conv, paths, seed)
    vv = mc_vvix_log(params, T, conv, paths, seed)
    row["mc_F_VIX"], row["mc_F_VIX_se"] = fut.mean, fut.std_error
    row["mc_log_contract"], row["mc_log_contract_se"] = vv.mean, vv.std_error
    ok = fut.within(row["F_VIX"], MC_SIGMAS) and vv.within(row["log_contract"], MC_SIGMAS)
    row["mc_pass"] = ok
    return ok


def cmd_vvix(args) -> int:
    params, conv = _resolve_params(args.params, args.rho)
    k1s = [args.k1] if args.k1 is not None else [5.0, 10.0]
    row = _vvix_row(_name(args.params), params, conv, k1s, args.kmax, args.dk)
    ok = _mc_columns(row, params, conv, args.paths, args.seed) if args.mc_check else True
    _emit(format_rows([row], args.format), args.out)
    return EXIT_OK if ok else EXIT_ERROR


def cmd_table1(args) -> int:
    k1s = [args.k1] if args.k1 is not None else [5.0, 10.0]
    rows, ok = [], True
    for name, params in PRESETS.items():
        conv = MarketConvention()
        if args.rho is not None:
            params = params.replace(rho=args.rho)
        row = _vvix_row(name, params, conv, k1s, args.kmax, args.dk)
        if args.mc_check:
            ok &= _mc_columns(row, params, conv, args.paths, args.seed)
        rows.append(row)
    _emit(format_rows(rows, args.format), args.out)
    return EXIT_OK if ok else EXIT_ERROR


def cmd_pde_table(args) -> int:
    params, conv = _resolve_params(args.params, args.rho)
    ladder = [args.grid] if args.grid else list(TABLE2_LADDER)
    vix_grid = default_vix_option_grid(args.k1, args.kmax, args.dk)
    rows = []
    for n, m, l_ in ladder:
        row = {"N": n, "M": m, "L": l_, "vvix": float("nan"), "error": ""}
        try:
            row["vvix"] = pde_vvix(params, conv, args.spot, M=m, L=l_, N=n, vix_grid=vix_grid).points
        except HestonVvixError as exc:
            log.error("grid %d/%d/%d failed: %s", n, m, l_, exc)
            row["error"] = f"{type(exc).__name__}: {exc}"
        rows.append(row)
    _emit(format_rows(rows, args.format), args.out)
    return EXIT_OK


def cmd_sweep(args) -> int:
    params, conv = _resolve_params(args.params, args.rho)
    lo, hi, step = args.sweep
    sigmas = lo + step * np.arange(int(math.floor((hi - lo) / step + 1e-9)) + 1)
    vix_grid = default_vix_option_grid(args.k1, args.kmax, args.dk)
    T = conv.delta
    calcs = {
        "simple": lambda p: vvix_simple(p, T, conv).points,
        "log_contract": lambda p: vvix_log_contract(p, T, conv).points,
        "replication": lambda p: vvix_by_replication(p, T, conv, vix_grid).points,
    }
    rows = []
    for s in sigmas:
        p = params.replace(sigma=float(round(s, 12)))
        row = {"sigma": p.sigma}
        for col, calc in calcs.items():
            try:
                row[col] = calc(p)
            except HestonVvixError as exc:
                log.warning("sigma=%g %s failed: %s", p.sigma, col, exc)
                row[col] = float("nan")
        rows.append(row)
    _emit(format_rows(rows, args.format), args.out)
    return EXIT_OK


def cmd_mc_check(args) -> int:
    names = [args.params] if args.params else list(PRESETS)
    rows, ok = [], True
    for source in names:
        params, conv = _resolve_params(source, args.rho)
        T = conv.delta
        fut = vix_future(params, T, conv).points
        checks = [
            ("F_VIX", fut, mc_vix_future(params, T, conv, args.paths, args.seed)),
            ("log_contract", vvix_log_contract(params, T, conv).points,
             mc_vvix_log(params, T, conv, args.paths, args.seed)),
        ]
        for k in (0.8 * fut, fut, 1.3 * fut):
            checks.append((f"call_{k:.4f}", vix_option(params, k, T, 1, conv),
                           mc_vix_option(params, k, T, 1, conv, args.paths, args.seed)))
        for quantity, value, est in checks:
            passed = est.within(value, MC_SIGMAS)
            ok &= passed
            rows.append({
                "set": _name(source), "quantity": quantity, "quadrature": value,
                "mc": est.mean, "mc_se": est.std_error,
                "z": (est.mean - value) / est.std_error if est.std_error > 0 else 0.0,
                "pass": passed,
            })
    _emit(format_rows(rows, args.format), args.out)
    return EXIT_OK if ok else EXIT_ERROR


def cmd_calibrate(args) -> int:
    quotes = read_quotes_csv(args.quotes)
    if args.vvix_penalty and args.vvix_solve is not None:
        raise CliError("--vvix-penalty and --vvix-solve are mutually exclusive")
    if args.vvix_penalty:
        mode = VvixMode.penalty(*args.vvix_penalty, model=args.vvix_model)
    elif args.vvix_solve is not None:
        mode = VvixMode.solve(args.vvix_solve)
    else:
        mode = VvixMode()
    fixed = {}
    if args.fix_kappa is not None:
        fixed["kappa"] = args.fix_kappa
    if args.fix_theta is not None:
        fixed["theta"] = args.fix_theta
    spec = CalibrationSpec(
        quotes=quotes,
        scheme=WeightScheme(args.weights, args.vega_floor, args.vega_rule),
        vvix_mode=mode,
        fixed=fixed,
        optimizer=OptimizerSettings(population=args.population, generations=args.generations, seed=args.seed),
        spot=args.spot,
        conv=MarketConvention(r=args.r, q=args.q),
    )
    result = calibrate(spec)
    doc = result.to_dict()
    doc["spec"] = spec_summary(spec)
    _emit(json.dumps(doc, indent=2, sort_keys=True) + "\n", args.out)
    if not result.converged:
        print(f"calibration did not converge: {result.message}", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    return EXIT_OK


# --- parser -----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hestonvvix", description="Theoretical VVIX under the Heston model.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, params_default="set1", fmt_default="csv"):
        p.add_argument("--params", default=params_default, help="preset set1..set6 or a JSON parameter file")
        p.add_argument("--rho", type=float, help="override the correlation")
        p.add_argument("--out", help="output file (default stdout)")
        p.add_argument("--format", choices=("csv", "json"), default=fmt_default)

    def strikes(p, k1_default):
        p.add_argument("--k1", type=float, default=k1_default, help="lowest VIX option strike")
        p.add_argument("--kmax", type=float, default=DEFAULT_KMAX)
        p.add_argument("--dk", type=float, default=DEFAULT_DK)

    def mc(p):
        p.add_argument("--paths", type=int, default=1_000_000)
        p.add_argument("--seed", type=int, default=42)

    p = sub.add_parser("vvix", help="F_VIX and the VVIX by log contract, replication and closed form")
    common(p)
    strikes(p, None)
    mc(p)
    p.add_argument("--mc-check", action="store_true", help="append Monte Carlo columns")
    p.set_defaults(func=cmd_vvix)

    p = sub.add_parser("table1", help="the vvix row for all six presets")
    p.add_argument("--rho", type=float)
    p.add_argument("--out")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    strikes(p, None)
    mc(p)
    p.add_argument("--mc-check", action="store_true")
    p.set_defaults(func=cmd_table1)

    p = sub.add_parser("pde-table", help="PDE VVIX over a ladder of grids")
    common(p, "set2")
    strikes(p, 10.0)
    p.add_argument("--grid", type=_grid, help="single N,M,L grid instead of the ladder")
    p.add_argument("--spot", type=float, default=100.0)
    p.set_defaults(func=cmd_pde_table)

    p = sub.add_parser("sweep", help="VVIX across a range of vol-of-vol")
    common(p, "set3")
    strikes(p, 10.0)
    p.add_argument("--sweep", type=_sweep, default=(0.1, 3.0, 0.05), help="lo:hi:step in sigma")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("mc-check", help="quadrature against Monte Carlo")
    common(p, None)
    mc(p)
    p.set_defaults(func=cmd_mc_check)

    p = sub.add_parser("calibrate", help="fit Heston parameters to a quote CSV")
    p.add_argument("--quotes", required=True)
    p.add_argument("--out")
    p.add_argument("--spot", type=float, default=100.0)
    p.add_argument("--r", type=float, default=0.0, help="flat rate for forwards")
    p.add_argument("--q", type=float, default=0.0, help="flat dividend yield")
    p.add_argument("--weights", choices=("uniform", "discount", "vega"), default="vega")
    p.add_argument("--vega-floor", type=float, default=1e-2)
    p.add_argument("--vega-rule", choices=("floor", "min"), default="floor")
    p.add_argument("--vvix-penalty", type=_pair, help="weight,target")
    p.add_argument("--vvix-model", choices=("log-contract", "simple"), default="log-contract")
    p.add_argument("--vvix-solve", type=float, help="VVIX target that pins sigma")
    p.add_argument("--fix-kappa", type=float)
    p.add_argument("--fix-theta", type=float)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--population", type=int, default=30)
    p.add_argument("--generations", type=int, default=200)
    p.set_defaults(func=cmd_calibrate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except (CliError, HestonVvixError, OSError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
