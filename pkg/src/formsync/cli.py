"""Command-line interface: ``formsync run|check|suite|list``."""
from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from .errors import FormSyncError
from .sim import bundled_scenarios, condition_reports, integrate, load_scenario, run_paper_suite, write_csv


def _jsonable(x):
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, (np.floating, np.integer, np.bool_)):
        return x.item()
    if isinstance(x, float) and not math.isfinite(x):
        return None
    return x


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.6g}"
    return str(v)


def _print_report(name: str, rep, out) -> None:
    print(f"[{name}]", file=out)
    print(f"  tracking_ok   {rep.tracking_ok}  (min eig L = {rep.min_eig_L:.6g})", file=out)
    print(f"  sync_ok       {rep.sync_ok}  (min eig D2 = {rep.D2_min:.6g})", file=out)
    print(f"  timescale_ok  {rep.timescale_ok}  (max eig D1 = {rep.D1_max:.6g})", file=out)
    print(f"  alpha_max     {rep.alpha_max:.6g}", file=out)
    print(f"  semidefinite  {rep.semidefinite}", file=out)
    rb = rep.robustness
    if rb is not None:
        print(
            f"  robust_ok     {rb.robust_ok}  (R_bound = {rb.R_bound:.6g}, rate = {rb.lambda_max:.6g}, "
            f"Delta = {rb.Delta:.6g}, gamma = {rb.gamma:.6g})",
            file=out,
        )
    for note in rep.notes:
        print(f"  note: {note}", file=out)


def _failed(reports) -> bool:
    for rep in reports.values():
        if not (rep.tracking_ok and rep.sync_ok):
            return True
        if rep.robustness is not None and not rep.robustness.robust_ok:
            return True
    return False


def _print_summary(log, out) -> None:
    print(f"{log.name}: {log.t.size} samples to t = {log.t[-1]:.6g} s (backend {log.backend})", file=out)
    for k, v in log.summary.to_dict().items():
        if v is not None:
            print(f"  {k:24s} {_fmt(v)}", file=out)


def cmd_check(args) -> int:
    cfg = load_scenario(args.scenario)
    reports = condition_reports(cfg)
    if args.json:
        print(json.dumps(_jsonable({k: r.to_dict() for k, r in reports.items()}), indent=2))
    else:
        if not reports:
            print("single craft: no coupling conditions")
        for name, rep in reports.items():
            _print_report(name, rep, sys.stdout)
    return 1 if args.strict and _failed(reports) else 0


def cmd_run(args) -> int:
    cfg = load_scenario(args.scenario)
    if args.dt is not None or args.t_final is not None:
        cfg = cfg.with_integrator(args.dt, args.t_final)
    log = integrate(cfg, backend=args.backend)
    out = args.out or cfg.output.path or f"{cfg.name}.csv"
    write_csv(log, out)
    if args.json:
        print(json.dumps(_jsonable({"csv": str(out), "summary": log.summary.to_dict(),
                                    "reports": {k: r.to_dict() for k, r in log.reports.items()}}), indent=2))
    else:
        _print_summary(log, sys.stdout)
        print(f"  csv                      {out}")
        for name, rep in log.reports.items():
            _print_report(name, rep, sys.stdout)
    return 1 if args.strict and _failed(log.reports) else 0


def cmd_suite(args) -> int:
    failed = False
    outdir = Path(args.out_dir) if args.out_dir else None
    for log in run_paper_suite(backend=args.backend):
        _print_summary(log, sys.stdout)
        for rname, rep in log.reports.items():
            _print_report(rname, rep, sys.stdout)
        if outdir is not None:
            write_csv(log, outdir / f"{log.name}.csv")
        failed |= _failed(log.reports)
    return 1 if args.strict and failed else 0


def cmd_list(args) -> int:
    for name in bundled_scenarios():
        print(name)
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="formsync", description=__doc__)
    ap.add_argument("--strict", action="store_true", help="exit 1 when any stability condition fails")
    ap.add_argument("--backend", choices=("compiled", "python"), default=None)
    sub = ap.add_subparsers(dest="cmd", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--strict", action="store_true", default=argparse.SUPPRESS)
    common.add_argument("--json", action="store_true", help="machine-readable output")

    r = sub.add_parser("run", parents=[common], help="integrate a scenario and write CSV")
    r.add_argument("scenario", help="scenario file or bundled fixture name")
    r.add_argument("--out", help="CSV path (default: output.path or <name>.csv)")
    r.add_argument("--dt", type=float)
    r.add_argument("--t-final", dest="t_final", type=float)
    r.set_defaults(func=cmd_run)

    c = sub.add_parser("check", parents=[common], help="print the stability-condition report")
    c.add_argument("scenario")
    c.set_defaults(func=cmd_check)

    s = sub.add_parser("suite", parents=[common], help="run the bundled case studies")
    s.add_argument("--out-dir", help="write one CSV per case study here")
    s.set_defaults(func=cmd_suite)

    ls = sub.add_parser("list", help="list bundled scenarios")
    ls.set_defaults(func=cmd_list)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    args.json = getattr(args, "json", False)
    try:
        return args.func(args)
    except FormSyncError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
