"""Command-line entry point.

Subcommands:

  dump-complex     symbolic E0 bases, d_c, d_c*, Delta as text/JSON/CSV
  verify-symbolic  exact identity suite over n = 1..n_max (exit 0 iff clean)
  heat-run         evolve an initial bump per config; snapshots + diagnostics
  verify-heat      refinement suites: scaling|semigroup|symmetry|pde|inverse
  calderon-run     reproducing-formula study at one degree
  print-config     dump the default configuration

Exit codes: 0 success, 1 identity or tolerance failure, 2 usage/config error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace

import numpy as np

from . import __version__
from .config import (
    ConfigError,
    config_dict,
    default_config,
    heat_config,
    int_list,
    load_config,
    render_config,
)
from .grid import export_axis_csv, gaussian_bump, save_section
from .heat import BoundaryMassError, HeatEngine, evolve
from .report import (
    plot_error_curve,
    plot_trajectory_norms,
    write_csv,
    write_json,
    write_manifest,
)
from .rumin import get_complex, verify_symbolic
from .suites import SUITES, run_calderon, run_suite


def _ensure_outdir(path: str) -> str:
    os.makedirs(path, exist_ok=True)
    return path


def cmd_dump_complex(args) -> int:
    cplx = get_complex(args.n)
    h = args.degree
    basis = cplx.e0(h)
    payload = {
        "n": args.n,
        "degree": h,
        "dim": basis.dim,
        "weight": basis.weight,
        "basis": [v.to_json_dict() for v in basis.vectors],
        "norms_sq": [str(g) for g in basis.norms_sq],
        "dc": cplx.dc(h).to_json_dict(),
        "dc_star": cplx.dc_star(h).to_json_dict() if h >= 1 else None,
        "laplacian": cplx.laplacian(h).to_json_dict(),
    }
    if args.format == "json":
        text = json.dumps(payload, sort_keys=True, indent=1) + "\n"
    elif args.format == "text":
        lines = ["n=%d degree=%d dim=%d weight=%s" % (args.n, h, basis.dim, basis.weight)]
        lines.append("basis (index set: coefficient; squared norm):")
        for v, g in zip(basis.vectors, basis.norms_sq):
            lines.append("  %s   |.|^2 = %s" % (v.to_json_dict(), g))
        for name, op in (("d_c", cplx.dc(h)),
                         ("d_c*", cplx.dc_star(h) if h >= 1 else None),
                         ("Delta", cplx.laplacian(h))):
            if op is None:
                continue
            lines.append("%s: %d x %d" % (name, op.shape[0], op.shape[1]))
            for i, row in enumerate(op.to_text_rows()):
                for j, entry in enumerate(row):
                    lines.append("  [%d,%d] %s" % (i, j, entry))
        text = "\n".join(lines) + "\n"
    else:  # csv
        rows = []
        for name, op in (("dc", cplx.dc(h)),
                         ("dc_star", cplx.dc_star(h) if h >= 1 else None),
                         ("laplacian", cplx.laplacian(h))):
            if op is None:
                continue
            for i, row in enumerate(op.to_text_rows()):
                for j, entry in enumerate(row):
                    rows.append('%s,%d,%d,"%s"' % (name, i, j, entry))
        text = "operator,row,col,entry\n" + "\n".join(rows) + "\n"
    if args.out:
        with open(args.out, "w") as f:
            f.write(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_verify_symbolic(args) -> int:
    reports = []
    ok = True
    for n in range(1, args.n_max + 1):
        rep = verify_symbolic(n, include_leibniz=not args.skip_leibniz)
        reports.append(rep)
        for check in rep["checks"]:
            status = "PASS" if check["passed"] else "FAIL"
            print("[%s] n=%d %s" % (status, n, check["name"]))
            if not check["passed"]:
                ok = False
        dims = next(c for c in rep["checks"] if c["name"] == "e0_dimensions")
        print("n=%d dims %s (%.1fs)" % (n, dims.get("dims"), rep["elapsed_seconds"]))
    if args.json:
        write_json(args.json, {"reports": reports, "all_passed": ok})
    if not ok:
        failing = [
            c["name"]
            for rep in reports
            for c in rep["checks"]
            if not c["passed"]
        ]
        print("FAILED identities: %s" % ", ".join(failing))
    return 0 if ok else 1


def _load(args):
    cfg_file = getattr(args, "config", None)
    cp = load_config(cfg_file)
    return cp


def cmd_heat_run(args) -> int:
    cp = _load(args)
    cfg = heat_config(cp)
    outdir = _ensure_outdir(args.outdir or cp["run"].get("outdir"))
    engine = HeatEngine(cfg)
    width = cp["suite"].getfloat("bump_width")
    bump = gaussian_bump(engine.spec, (width,) * 3)
    if engine.ncomp == 1:
        u0 = bump
    else:
        from .grid import GridSection

        data = np.stack([(1.0 + 0.3 * j) * bump.data[0] for j in range(engine.ncomp)])
        u0 = GridSection(engine.spec, cfg.degree, data)
    snap_raw = cp["run"].get("snapshot_times").strip()
    snaps = [float(t) for t in snap_raw.split(",") if t] or [cfg.t_final]
    try:
        traj = evolve(u0, cfg, snapshot_times=snaps, engine=engine)
    except BoundaryMassError as exc:
        write_json(os.path.join(outdir, "diagnostics.json"),
                   {"aborted": str(exc), "diagnostics": exc.diagnostics})
        print("ABORT: %s" % exc)
        return 1
    outputs = []
    for t, snap in zip(traj.times, traj.snapshots):
        base = os.path.join(outdir, "snapshot_s%s.grid" % ("%g" % t).replace(".", "p"))
        save_section(base, snap)
        export_axis_csv(base + ".slice.csv", snap, axis=0)
        outputs.extend([base, base + ".json", base + ".slice.csv"])
    diag_path = write_json(os.path.join(outdir, "diagnostics.json"),
                           {"diagnostics": traj.diagnostics})
    outputs.append(diag_path)
    if cp["run"].getboolean("plots"):
        outputs.append(plot_trajectory_norms(
            os.path.join(outdir, "trajectory.png"), traj.diagnostics,
            "degree %d heat run" % cfg.degree))
    write_manifest(outdir, "heat-run", config_dict(cp), outputs)
    print("wrote %d artifacts to %s" % (len(outputs), outdir))
    return 0


def _suite_params(cp) -> dict:
    s = cp["suite"]
    return {
        "resolutions": int_list(s.get("resolutions")),
        "s": s.getfloat("s"),
        "r": s.getfloat("r"),
        "eps_cells": s.getfloat("eps_cells"),
        "eps_cells_t": s.getfloat("eps_cells_t"),
        "semigroup_s": s.getfloat("semigroup_s"),
        "semigroup_sigma": s.getfloat("semigroup_sigma"),
        "bump_width": s.getfloat("bump_width"),
        "m_final": s.getfloat("m_final"),
    }


def cmd_verify_heat(args) -> int:
    cp = _load(args)
    cfg = heat_config(cp)
    outdir = _ensure_outdir(args.outdir or cp["run"].get("outdir"))
    try:
        header, rows, summary = run_suite(args.suite, cfg, _suite_params(cp))
    except BoundaryMassError as exc:
        print("ABORT: %s" % exc)
        return 1
    csv_path = write_csv(os.path.join(outdir, "%s.csv" % args.suite), header, rows)
    json_path = write_json(os.path.join(outdir, "%s.json" % args.suite), summary)
    outputs = [csv_path, json_path]
    if cp["run"].getboolean("plots"):
        xs = [row[0] for row in rows]
        ys = [row[1] for row in rows]
        outputs.append(plot_error_curve(
            os.path.join(outdir, "%s.png" % args.suite), xs, ys,
            header[0], header[1], "%s suite, degree %d" % (args.suite, cfg.degree)))
    write_manifest(outdir, "verify-heat %s" % args.suite, config_dict(cp), outputs)
    print("suite=%s degree=%d passed=%s" % (args.suite, cfg.degree, summary["passed"]))
    for key in ("errors", "observed_order", "finest_error"):
        if key in summary:
            print("  %s: %s" % (key, summary[key]))
    return 0 if summary["passed"] else 1


def cmd_calderon_run(args) -> int:
    cp = _load(args)
    cfg = heat_config(cp, degree=args.degree)
    cfg = replace(cfg, n=args.n)
    outdir = _ensure_outdir(args.outdir or cp["run"].get("outdir"))
    params = {
        "s_max": cp["calderon"].getfloat("s_max"),
        "rho": cp["calderon"].getfloat("rho"),
        "sign": -1 if args.paper_sign else int(cp["calderon"].get("sign")),
        "width_scale": cp["calderon"].getfloat("width_scale"),
        "smooth_time": cp["calderon"].getfloat("smooth_time"),
        "compare_intertwined": cp["calderon"].getboolean("compare_intertwined"),
    }
    seed = cp["run"].getint("seed")
    try:
        report, header, rows = run_calderon(cfg, params, seed)
    except BoundaryMassError as exc:
        print("ABORT: %s" % exc)
        return 1
    csv_path = write_csv(os.path.join(outdir, "calderon.csv"), header, rows)
    json_path = write_json(os.path.join(outdir, "calderon.json"), report.to_json_dict())
    outputs = [csv_path, json_path]
    if cp["run"].getboolean("plots"):
        outputs.append(plot_error_curve(
            os.path.join(outdir, "calderon.png"),
            report.s_values, report.integrand_norms, "s", "integrand norm",
            "Calderon integrand, degree %d (sign %+d)" % (report.degree, report.sign),
            extra={"cumulative error": (report.s_values, report.cumulative_errors)}))
    write_manifest(outdir, "calderon-run", config_dict(cp), outputs)
    print("degree=%d sign=%+d rel_l2=%.4f rel_l1=%.4f head=%.2e tail=%.2e route_gap=%s"
          % (report.degree, report.sign, report.rel_l2_error, report.rel_l1_error,
             report.head_estimate, report.tail_estimate,
             "%.3f" % report.route_discrepancy if report.route_discrepancy is not None else "n/a"))
    return 0


def cmd_print_config(_args) -> int:
    sys.stdout.write(render_config(default_config()))
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="ruminheat",
        description="Rumin complex, heat semigroups and Calderon reproduction on Heisenberg groups",
    )
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    d = sub.add_parser("dump-complex", help="dump E0 bases and operator matrices")
    d.add_argument("--n", type=int, required=True)
    d.add_argument("--degree", type=int, required=True)
    d.add_argument("--format", choices=("json", "text", "csv"), default="json")
    d.add_argument("--out")
    d.set_defaults(func=cmd_dump_complex)

    v = sub.add_parser("verify-symbolic", help="run the exact identity suite")
    v.add_argument("--n-max", type=int, default=3)
    v.add_argument("--json", help="write the JSON report here")
    v.add_argument("--skip-leibniz", action="store_true")
    v.set_defaults(func=cmd_verify_symbolic)

    hr = sub.add_parser("heat-run", help="evolve an initial bump per config")
    hr.add_argument("--config")
    hr.add_argument("--outdir")
    hr.set_defaults(func=cmd_heat_run)

    vh = sub.add_parser("verify-heat", help="refinement suites")
    vh.add_argument("--suite", choices=SUITES, required=True)
    vh.add_argument("--config")
    vh.add_argument("--outdir")
    vh.set_defaults(func=cmd_verify_heat)

    cr = sub.add_parser("calderon-run", help="reproducing formula study")
    cr.add_argument("--n", type=int, default=1)
    cr.add_argument("--degree", type=int, default=2)
    cr.add_argument("--config")
    cr.add_argument("--outdir")
    cr.add_argument("--paper-sign", action="store_true",
                    help="use the flipped sign convention for the diagnostic study")
    cr.set_defaults(func=cmd_calderon_run)

    pc = sub.add_parser("print-config", help="print the default configuration")
    pc.set_defaults(func=cmd_print_config)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print("config error: %s" % exc, file=sys.stderr)
        return 2
    except ValueError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
